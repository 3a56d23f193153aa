import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

export const loadFixture = <T>(relative: string): T =>
  JSON.parse(
    readFileSync(fileURLToPath(new URL(`./fixtures/${relative}`, import.meta.url)), "utf-8")
  ) as T;
