/**
 * HTTP sidecar exposing the summarization backend wire protocol.
 *
 * Endpoints (all JSON):
 *   POST /v1/generate            prompt -> text, tokens, per-step attention
 *   POST /v1/sentence_attention  text -> final-layer (H, T, T) tensor
 *   POST /v1/entail              document + span -> strict entailment verdict
 *   POST /v1/revise              document + summary + flagged spans -> text
 *   GET  /v1/health              model identity and serving policy
 *
 * Oversized prompts are refused with 413. Attention tensors are the
 * model's own final-layer weights; "final" is the only layer policy.
 */

import express, { type Request, type Response } from "express";
import { pathToFileURL } from "node:url";

import { entail, revise } from "./entail.js";
import { DEFAULT_CONFIG, TinyCausalTransformer } from "./model.js";
import { generate } from "./summarize.js";
import { tokenize } from "./tokenizer.js";
import { encodeTensor } from "./wire.js";

export const MODEL_ID = "tiny-attn-v1";

export interface ServerConfig {
  seed: number;
  maxContext: number;
  inputBoost: number;
}

export const DEFAULT_SERVER_CONFIG: ServerConfig = {
  seed: 0,
  maxContext: 4096,
  inputBoost: 3.0,
};

function badRequest(res: Response, message: string): void {
  res.status(400).json({ error: message });
}

export function createApp(config: ServerConfig = DEFAULT_SERVER_CONFIG) {
  const model = new TinyCausalTransformer({ ...DEFAULT_CONFIG, seed: config.seed });
  const app = express();
  app.use(express.json({ limit: "32mb" }));

  app.get("/v1/health", (_req: Request, res: Response) => {
    res.json({
      status: "ok",
      model_id: MODEL_ID,
      attention_layer: "final",
      heads: model.config.heads,
      layers: model.config.layers,
      d_model: model.config.dModel,
      seed: config.seed,
      max_context: config.maxContext,
    });
  });

  app.post("/v1/generate", (req: Request, res: Response) => {
    const body = req.body ?? {};
    const { prompt, encoding } = body;
    const maxNewTokens = body.max_new_tokens ?? 256;
    const temperature = body.temperature ?? 0.0;
    if (typeof prompt !== "string") {
      return badRequest(res, "prompt must be a string");
    }
    if (!Number.isInteger(maxNewTokens) || maxNewTokens < 1) {
      return badRequest(res, "max_new_tokens must be a positive integer");
    }
    if (typeof temperature !== "number" || temperature < 0) {
      return badRequest(res, "temperature must be a non-negative number");
    }
    const promptTokens = tokenize(prompt).length;
    if (promptTokens > config.maxContext) {
      return res.status(413).json({
        error:
          `prompt holds ${promptTokens} tokens, ` +
          `context limit is ${config.maxContext}`,
      });
    }

    // Decoding is greedy and grounded; temperature is accepted for
    // protocol compatibility but does not introduce randomness.
    const result = generate(model, prompt, maxNewTokens, config.inputBoost);
    res.json({
      model_id: MODEL_ID,
      text: result.text,
      tokens: result.tokens.map((t) => ({
        text: t.text,
        start: t.start,
        end: t.end,
      })),
      input_positions: result.inputPositions,
      context_length: result.contextLength,
      step_attentions: result.steps.map((s) => ({
        step: s.step,
        heads: encodeTensor(s.data, [s.heads, s.length], encoding),
      })),
    });
  });

  app.post("/v1/sentence_attention", (req: Request, res: Response) => {
    const body = req.body ?? {};
    const { text, encoding } = body;
    if (typeof text !== "string") {
      return badRequest(res, "text must be a string");
    }
    const tokens = tokenize(text);
    if (tokens.length === 0) {
      return badRequest(res, "sentence_attention requires a non-empty sentence");
    }
    if (tokens.length > config.maxContext) {
      return res.status(413).json({
        error:
          `sentence holds ${tokens.length} tokens, ` +
          `context limit is ${config.maxContext}`,
      });
    }
    const att = model.attention(tokens.map((t) => t.text));
    res.json({
      weights: encodeTensor(att.data, [att.heads, att.tokens, att.tokens], encoding),
      heads: att.heads,
      tokens: att.tokens,
    });
  });

  app.post("/v1/entail", (req: Request, res: Response) => {
    const body = req.body ?? {};
    const { document, span } = body;
    if (typeof document !== "string" || typeof span !== "string") {
      return badRequest(res, "document and span must be strings");
    }
    res.json(entail(document, span));
  });

  app.post("/v1/revise", (req: Request, res: Response) => {
    const body = req.body ?? {};
    const { document, summary } = body;
    const flaggedSpans = body.flagged_spans;
    if (typeof document !== "string" || typeof summary !== "string") {
      return badRequest(res, "document and summary must be strings");
    }
    if (
      !Array.isArray(flaggedSpans) ||
      flaggedSpans.length === 0 ||
      !flaggedSpans.every((s: unknown) => typeof s === "string")
    ) {
      return badRequest(res, "flagged_spans must be a non-empty string array");
    }
    res.json({ text: revise(document, summary, flaggedSpans) });
  });

  app.use("/v1", (_req: Request, res: Response) => {
    res.status(404).json({ error: "unknown endpoint" });
  });

  // Body-parser failures (bad JSON, oversize) land here.
  app.use((err: Error & { status?: number }, _req: Request, res: Response, _next: unknown) => {
    res.status(err.status ?? 400).json({ error: err.message });
  });

  return app;
}

interface CliArgs {
  model: string;
  port: number;
  layer: string;
  maxContext: number;
  seed: number;
  inputBoost: number;
}

export function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = {
    model: MODEL_ID,
    port: 8077,
    layer: "final",
    maxContext: DEFAULT_SERVER_CONFIG.maxContext,
    seed: DEFAULT_SERVER_CONFIG.seed,
    inputBoost: DEFAULT_SERVER_CONFIG.inputBoost,
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      const value = argv[++i];
      if (value === undefined) {
        throw new Error(`${arg} expects a value`);
      }
      return value;
    };
    if (arg === "--model") {
      args.model = next();
    } else if (arg === "--port") {
      args.port = parseInt(next(), 10);
    } else if (arg === "--layer") {
      args.layer = next();
    } else if (arg === "--max-context") {
      args.maxContext = parseInt(next(), 10);
    } else if (arg === "--seed") {
      args.seed = parseInt(next(), 10);
    } else if (arg === "--input-boost") {
      args.inputBoost = parseFloat(next());
    } else {
      throw new Error(`unknown flag ${arg}`);
    }
  }
  if (!Number.isInteger(args.port) || args.port < 0 || args.port > 65535) {
    throw new Error("--port must be a valid port number");
  }
  if (!Number.isInteger(args.maxContext) || args.maxContext < 1) {
    throw new Error("--max-context must be a positive integer");
  }
  if (!Number.isInteger(args.seed)) {
    throw new Error("--seed must be an integer");
  }
  if (!Number.isFinite(args.inputBoost)) {
    throw new Error("--input-boost must be a number");
  }
  return args;
}

function main(): void {
  let args: CliArgs;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error((err as Error).message);
    process.exit(2);
  }
  // Startup errors: only the built-in seeded model and the final
  // attention layer can be served.
  if (args.model !== MODEL_ID) {
    console.error(`unknown model ${args.model}; only ${MODEL_ID} is available`);
    process.exit(1);
  }
  if (args.layer !== "final") {
    console.error(`unsupported attention layer ${args.layer}; serving "final" only`);
    process.exit(1);
  }
  const app = createApp({
    seed: args.seed,
    maxContext: args.maxContext,
    inputBoost: args.inputBoost,
  });
  const server = app.listen(args.port, () => {
    const addr = server.address();
    const port = typeof addr === "object" && addr !== null ? addr.port : args.port;
    console.log(`${MODEL_ID} serving /v1 on port ${port} (seed ${args.seed})`);
  });
}

if (
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  main();
}
