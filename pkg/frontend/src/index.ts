export * from "./types.js";
export * from "./client.js";
export * from "./compose.js";
export * from "./timeline.js";
export * from "./staleness.js";
export * from "./recovery.js";
export * from "./console.js";
