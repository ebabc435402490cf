/** Browser entry point: load config, mount the console, start polling. */

import { App } from "./app.js";
import { loadConfig } from "./config.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app element");
  const fetchFn = fetch.bind(globalThis);
  const config = await loadConfig(fetchFn);
  new App(root, config, fetchFn).start();
}

void boot();
