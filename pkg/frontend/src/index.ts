export { SessionClient, type ClientOptions } from "./client.js";
export { brightness, cellColor, gridColors, GRID_SIZE } from "./heatmap.js";
export { KeyboardSteering, type Command } from "./keyboard.js";
export {
  GRID_CELLS,
  MAX_DUTY,
  parseServerMessage,
  type Direction,
  type ServerMessage,
  type Simultaneity,
  type TrialRecord,
} from "./protocol.js";
export {
  LineBuffer,
  serverFromQuery,
  webSocketTransport,
  type Transport,
  type TransportFactory,
} from "./transport.js";
export {
  initialViewState,
  type Connection,
  type Mode,
  type ViewState,
} from "./viewstate.js";
