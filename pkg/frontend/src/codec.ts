// Binary frame codec. Field names and validation order intentionally
// match the server's codec so both sides pass the same golden-vector
// file; see docs/frames.md in the repository root for the layouts.

export const FRAME_HEADER = 0xa5;
export const FRAME_END = 0x0d;

export const TYPE_LED = 0x30;
export const TYPE_HEATING = 0x31;
export const TYPE_COOLING = 0x32;
export const TYPE_DEHUMIDIFY = 0x33;
export const TYPE_DRIP = 0x34;
export const TYPE_HUMIDIFIER = 0x35;
export const STATUS_OFFSET = 0x20;
export const TYPE_QUERY = 0x20;
export const TYPE_SET_TEMPERATURE = 0x40;
export const TYPE_SET_HUMIDITY = 0x41;
export const TYPE_SET_LIGHT = 0x42;
export const TYPE_AGG_TEMPERATURE = 0x60;
export const TYPE_AGG_HUMIDITY = 0x61;
export const TYPE_AGG_LIGHT = 0x62;
export const TYPE_AGG_SOIL = 0x63;
export const TYPE_DATA_TEMPERATURE = 0x01;
export const TYPE_DATA_HUMIDITY = 0x02;
export const TYPE_DATA_LIGHT = 0x03;
export const TYPE_DATA_SOIL = 0x04;

export const TEMP_MIN_C = -10;
export const TEMP_MAX_C = 40;
export const HUMIDITY_MIN = 0;
export const HUMIDITY_MAX = 100;
export const LIGHT_MIN = 0;
export const LIGHT_MAX = 30000;

const LEN_SENSOR = 6;
const LEN_SENSOR_LIGHT = 7;
const LEN_AUTO_INSTRUCTION = 9;
const LEN_GEAR_FRAME = 15;
const LEN_APP_DATA = 24;
const LEN_NET_SENSOR_DATA = 37;

// (instruction type, field name, display name, maximum gear)
export const ACTUATOR_TABLE = [
  [TYPE_LED, "led_gear", "LED", 3],
  [TYPE_HEATING, "heating_gear", "heating plate", 5],
  [TYPE_COOLING, "cooling_gear", "cooling fan", 5],
  [TYPE_DEHUMIDIFY, "dehumidify_gear", "dehumidify fan", 5],
  [TYPE_DRIP, "drip_switch", "drip irrigation", 1],
  [TYPE_HUMIDIFIER, "humidifier_switch", "humidifier", 1],
] as const;

export type BankField = (typeof ACTUATOR_TABLE)[number][1];

export const INSTRUCTION_TYPES: number[] = ACTUATOR_TABLE.map((e) => e[0]);
export const STATUS_TYPES: number[] = INSTRUCTION_TYPES.map((t) => t + STATUS_OFFSET);
export const GEAR_LIMIT = new Map<number, number>(
  ACTUATOR_TABLE.map((e) => [e[0], e[3]]),
);
export const ACTUATOR_FIELD = new Map<number, BankField>(
  ACTUATOR_TABLE.map((e) => [e[0], e[1]]),
);
export const ACTUATOR_NAME = new Map<number, string>(
  ACTUATOR_TABLE.map((e) => [e[0], e[2]]),
);

export class ProtocolError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}
export class DecodeError extends ProtocolError {}
export class BadHeader extends DecodeError {}
export class BadLength extends DecodeError {}
export class BadEnd extends DecodeError {}
export class UnknownType extends DecodeError {}
// The name clashes with the ECMAScript built-in, so the class gets a
// distinct identifier but reports the taxonomy name.
export class ValueRangeError extends ProtocolError {
  override name = "RangeError";
}

export interface Bank {
  led_gear: number;
  heating_gear: number;
  cooling_gear: number;
  dehumidify_gear: number;
  drip_switch: number;
  humidifier_switch: number;
}

export const zeroBank = (): Bank => ({
  led_gear: 0,
  heating_gear: 0,
  cooling_gear: 0,
  dehumidify_gear: 0,
  drip_switch: 0,
  humidifier_switch: 0,
});

export type Frame =
  | { kind: "SensorInstruction"; address: number; type_code: number; value: number }
  | { kind: "SensorData"; address: number; type_code: number; value: number }
  | {
      kind: "NetSensorData";
      temperatures: number[];
      humidities: number[];
      light_levels: number[];
      soil_states: number[];
    }
  | { kind: "NetExecutorStatus"; bank: Bank }
  | { kind: "GearInstruction"; bank: Bank }
  | {
      kind: "AppData";
      bank: Bank;
      temperature: number;
      humidity: number;
      light: number;
      soil: number;
    }
  | {
      kind: "AppAutoInstruction";
      temperature: number;
      humidity: number;
      light_hlux: number;
    };

function checkRange(name: string, value: number, lo: number, hi: number): number {
  if (!(lo <= value && value <= hi) || !Number.isInteger(value)) {
    throw new ValueRangeError(`${name} ${value} outside ${lo}..${hi}`);
  }
  return value;
}

export function encodeTemperature(celsius: number): number {
  checkRange("temperature", celsius, TEMP_MIN_C, TEMP_MAX_C);
  return celsius & 0xff;
}

export function decodeTemperature(byte: number): number {
  const value = byte > 127 ? byte - 256 : byte;
  return checkRange("temperature", value, TEMP_MIN_C, TEMP_MAX_C);
}

export const encodeHumidity = (percent: number): number =>
  checkRange("humidity", percent, HUMIDITY_MIN, HUMIDITY_MAX);
export const decodeHumidity = encodeHumidity;

export function encodeLight(lux: number): [number, number] {
  checkRange("light", lux, LIGHT_MIN, LIGHT_MAX);
  return [(lux >> 8) & 0xff, lux & 0xff];
}

export const decodeLight = (hi: number, lo: number): number =>
  checkRange("light", (hi << 8) | lo, LIGHT_MIN, LIGHT_MAX);

export const encodeSoil = (state: number): number =>
  checkRange("soil state", state, 0, 1);
export const decodeSoil = encodeSoil;

export const lightSetpointByte = (lux: number): number =>
  Math.max(0, Math.min(255, Math.round(lux / 100)));
export const lightSetpointLux = (byte: number): number => byte * 100;

export function validateBank(bank: Bank): void {
  for (const [type, field, name, limit] of ACTUATOR_TABLE) {
    void type;
    const value = bank[field];
    if (!(Number.isInteger(value) && 0 <= value && value <= limit)) {
      throw new ValueRangeError(`${name} gear ${value} outside 0..${limit}`);
    }
  }
}

export const bankGears = (bank: Bank): number[] =>
  ACTUATOR_TABLE.map((e) => bank[e[1]]);

function finish(body: number[]): Uint8Array {
  return Uint8Array.from([FRAME_HEADER, body.length + 3, ...body, FRAME_END]);
}

export function encodeFrame(frame: Frame): Uint8Array {
  switch (frame.kind) {
    case "SensorInstruction": {
      checkRange("address", frame.address, 0x01, 0x08);
      if (!INSTRUCTION_TYPES.includes(frame.type_code) && frame.type_code !== TYPE_QUERY) {
        throw new UnknownType(`not an instruction type: 0x${hex2(frame.type_code)}`);
      }
      // The wire carries any byte; executives clamp at apply time.
      checkRange("instruction value", frame.value, 0, 255);
      return finish([frame.address, frame.type_code, frame.value]);
    }
    case "SensorData": {
      checkRange("address", frame.address, 0x01, 0x08);
      if (STATUS_TYPES.includes(frame.type_code)) {
        const limit = GEAR_LIMIT.get(frame.type_code - STATUS_OFFSET)!;
        checkRange("status gear", frame.value, 0, limit);
        return finish([frame.address, frame.type_code, frame.value]);
      }
      if (frame.type_code === TYPE_DATA_LIGHT) {
        return finish([frame.address, frame.type_code, ...encodeLight(frame.value)]);
      }
      if (frame.type_code === TYPE_DATA_TEMPERATURE) {
        return finish([frame.address, frame.type_code, encodeTemperature(frame.value)]);
      }
      if (frame.type_code === TYPE_DATA_HUMIDITY) {
        return finish([frame.address, frame.type_code, encodeHumidity(frame.value)]);
      }
      if (frame.type_code === TYPE_DATA_SOIL) {
        return finish([frame.address, frame.type_code, encodeSoil(frame.value)]);
      }
      throw new UnknownType(`not a data type: 0x${hex2(frame.type_code)}`);
    }
    case "NetSensorData": {
      for (const [name, seq] of [
        ["temperatures", frame.temperatures],
        ["humidities", frame.humidities],
        ["light_levels", frame.light_levels],
        ["soil_states", frame.soil_states],
      ] as const) {
        if (seq.length !== 6) {
          throw new ValueRangeError(`${name} needs 6 entries, got ${seq.length}`);
        }
      }
      const body = [TYPE_AGG_TEMPERATURE, ...frame.temperatures.map(encodeTemperature)];
      body.push(TYPE_AGG_HUMIDITY, ...frame.humidities.map(encodeHumidity));
      body.push(TYPE_AGG_LIGHT);
      for (const lux of frame.light_levels) body.push(...encodeLight(lux));
      body.push(TYPE_AGG_SOIL, ...frame.soil_states.map(encodeSoil));
      return finish(body);
    }
    case "NetExecutorStatus":
    case "GearInstruction": {
      validateBank(frame.bank);
      const base = frame.kind === "NetExecutorStatus" ? STATUS_TYPES : INSTRUCTION_TYPES;
      const gears = bankGears(frame.bank);
      const body: number[] = [];
      base.forEach((type, i) => body.push(type, gears[i]!));
      return finish(body);
    }
    case "AppData": {
      validateBank(frame.bank);
      const body: number[] = [];
      const gears = bankGears(frame.bank);
      STATUS_TYPES.forEach((type, i) => body.push(type, gears[i]!));
      body.push(TYPE_AGG_TEMPERATURE, encodeTemperature(frame.temperature));
      body.push(TYPE_AGG_HUMIDITY, encodeHumidity(frame.humidity));
      body.push(TYPE_AGG_LIGHT, ...encodeLight(frame.light));
      body.push(TYPE_AGG_SOIL, encodeSoil(frame.soil));
      return finish(body);
    }
    case "AppAutoInstruction": {
      checkRange("temperature setpoint", frame.temperature, TEMP_MIN_C, TEMP_MAX_C);
      checkRange("humidity setpoint", frame.humidity, HUMIDITY_MIN, HUMIDITY_MAX);
      checkRange("light setpoint", frame.light_hlux, 0, 255);
      return finish([
        TYPE_SET_TEMPERATURE,
        frame.temperature & 0xff,
        TYPE_SET_HUMIDITY,
        frame.humidity,
        TYPE_SET_LIGHT,
        frame.light_hlux,
      ]);
    }
  }
}

const hex2 = (b: number): string => b.toString(16).padStart(2, "0").toUpperCase();

function expectType(data: Uint8Array, offset: number, expected: number): void {
  if (data[offset] !== expected) {
    throw new UnknownType(
      `expected type 0x${hex2(expected)} at offset ${offset}, got 0x${hex2(data[offset]!)}`,
    );
  }
}

function decodeGearRun(data: Uint8Array, typeBase: number[]): Bank {
  const bank = zeroBank();
  typeBase.forEach((type, slot) => {
    const offset = 2 + slot * 2;
    expectType(data, offset, type);
    const gear = data[offset + 1]!;
    const instr = GEAR_LIMIT.has(type) ? type : type - STATUS_OFFSET;
    const limit = GEAR_LIMIT.get(instr)!;
    if (gear > limit) {
      throw new ValueRangeError(
        `${ACTUATOR_NAME.get(instr)} gear ${gear} outside 0..${limit}`,
      );
    }
    bank[ACTUATOR_FIELD.get(instr)!] = gear;
  });
  return bank;
}

export function decodeFrame(data: Uint8Array): Frame {
  // Validation order matches the wire contract: header, then the length
  // byte against the actual count, then the terminator, then types, then
  // value ranges.
  if (data.length === 0) throw new BadHeader("empty input");
  if (data[0] !== FRAME_HEADER) {
    throw new BadHeader(`header 0x${hex2(data[0]!)}, expected 0xA5`);
  }
  if (data.length < LEN_SENSOR) {
    throw new BadLength(`${data.length} bytes is shorter than any frame`);
  }
  if (data[1] !== data.length) {
    throw new BadLength(`length byte ${data[1]}, actual ${data.length}`);
  }
  if (data[data.length - 1] !== FRAME_END) {
    throw new BadEnd(`terminator 0x${hex2(data[data.length - 1]!)}, expected 0x0D`);
  }

  const size = data.length;

  if (size === LEN_SENSOR) {
    const [address, type_code, value] = [data[2]!, data[3]!, data[4]!];
    if (type_code === TYPE_QUERY || INSTRUCTION_TYPES.includes(type_code)) {
      return { kind: "SensorInstruction", address, type_code, value };
    }
    if (STATUS_TYPES.includes(type_code)) {
      const limit = GEAR_LIMIT.get(type_code - STATUS_OFFSET)!;
      if (value > limit) {
        throw new ValueRangeError(`status gear ${value} outside 0..${limit}`);
      }
      return { kind: "SensorData", address, type_code, value };
    }
    if (type_code === TYPE_DATA_TEMPERATURE) {
      return { kind: "SensorData", address, type_code, value: decodeTemperature(value) };
    }
    if (type_code === TYPE_DATA_HUMIDITY) {
      return { kind: "SensorData", address, type_code, value: decodeHumidity(value) };
    }
    if (type_code === TYPE_DATA_SOIL) {
      return { kind: "SensorData", address, type_code, value: decodeSoil(value) };
    }
    throw new UnknownType(`type 0x${hex2(type_code)} in a ${size}-byte frame`);
  }

  if (size === LEN_SENSOR_LIGHT) {
    const [address, type_code] = [data[2]!, data[3]!];
    if (type_code !== TYPE_DATA_LIGHT) {
      throw new UnknownType(`type 0x${hex2(type_code)} in a ${size}-byte frame`);
    }
    return {
      kind: "SensorData",
      address,
      type_code,
      value: decodeLight(data[4]!, data[5]!),
    };
  }

  if (size === LEN_AUTO_INSTRUCTION) {
    expectType(data, 2, TYPE_SET_TEMPERATURE);
    expectType(data, 4, TYPE_SET_HUMIDITY);
    expectType(data, 6, TYPE_SET_LIGHT);
    return {
      kind: "AppAutoInstruction",
      temperature: decodeTemperature(data[3]!),
      humidity: decodeHumidity(data[5]!),
      light_hlux: data[7]!,
    };
  }

  if (size === LEN_GEAR_FRAME) {
    const lead = data[2]!;
    if (lead === TYPE_LED) {
      return { kind: "GearInstruction", bank: decodeGearRun(data, INSTRUCTION_TYPES) };
    }
    if (lead === TYPE_LED + STATUS_OFFSET) {
      return { kind: "NetExecutorStatus", bank: decodeGearRun(data, STATUS_TYPES) };
    }
    throw new UnknownType(`type 0x${hex2(lead)} in a ${size}-byte frame`);
  }

  if (size === LEN_APP_DATA) {
    const bank = decodeGearRun(data, STATUS_TYPES);
    expectType(data, 14, TYPE_AGG_TEMPERATURE);
    expectType(data, 16, TYPE_AGG_HUMIDITY);
    expectType(data, 18, TYPE_AGG_LIGHT);
    expectType(data, 21, TYPE_AGG_SOIL);
    return {
      kind: "AppData",
      bank,
      temperature: decodeTemperature(data[15]!),
      humidity: decodeHumidity(data[17]!),
      light: decodeLight(data[19]!, data[20]!),
      soil: decodeSoil(data[22]!),
    };
  }

  if (size === LEN_NET_SENSOR_DATA) {
    expectType(data, 2, TYPE_AGG_TEMPERATURE);
    expectType(data, 9, TYPE_AGG_HUMIDITY);
    expectType(data, 16, TYPE_AGG_LIGHT);
    expectType(data, 29, TYPE_AGG_SOIL);
    const temps = [...data.slice(3, 9)].map(decodeTemperature);
    const hums = [...data.slice(10, 16)].map(decodeHumidity);
    const light = Array.from({ length: 6 }, (_, i) =>
      decodeLight(data[17 + 2 * i]!, data[18 + 2 * i]!),
    );
    const soil = [...data.slice(30, 36)].map(decodeSoil);
    return {
      kind: "NetSensorData",
      temperatures: temps,
      humidities: hums,
      light_levels: light,
      soil_states: soil,
    };
  }

  throw new UnknownType(`no frame kind is ${size} bytes long`);
}

// -- Flat field views, mirroring the server's encode/decode endpoints --------

export function frameFields(frame: Frame): Record<string, number | number[]> {
  const out: Record<string, number | number[]> = {};
  for (const [key, value] of Object.entries(frame)) {
    if (key === "kind") continue;
    if (key === "bank") {
      for (const entry of ACTUATOR_TABLE) out[entry[1]] = (value as Bank)[entry[1]];
    } else {
      out[key] = value as number | number[];
    }
  }
  return out;
}

const BANK_KINDS = new Set(["NetExecutorStatus", "GearInstruction", "AppData"]);
const FRAME_KIND_NAMES = new Set([
  "SensorInstruction",
  "SensorData",
  "NetSensorData",
  "NetExecutorStatus",
  "GearInstruction",
  "AppData",
  "AppAutoInstruction",
]);

export function frameFromFields(
  kind: string,
  fields: Record<string, number | number[]>,
): Frame {
  if (!FRAME_KIND_NAMES.has(kind)) {
    throw new ProtocolError(`unknown frame kind: ${kind}`);
  }
  const rest: Record<string, number | number[]> = { ...fields };
  delete rest["kind"];
  if (BANK_KINDS.has(kind)) {
    const bank = zeroBank();
    for (const entry of ACTUATOR_TABLE) {
      const field = entry[1];
      if (field in rest) {
        bank[field] = Number(rest[field]);
        delete rest[field];
      }
    }
    return { kind, bank, ...rest } as Frame;
  }
  return { kind, ...rest } as Frame;
}

// -- Hex helpers -------------------------------------------------------------

export function hexToBytes(text: string): Uint8Array {
  const clean = text.trim();
  if (clean.length % 2 !== 0 || !/^[0-9a-fA-F]*$/.test(clean)) {
    throw new ProtocolError(`not hex: ${text}`);
  }
  const out = new Uint8Array(clean.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(clean.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export const bytesToHex = (data: Uint8Array): string =>
  [...data].map(hex2).join("");

// A bridge text message is a frame iff it parses as at least one whole
// hex byte; everything else is a JSON op.
export const isHexMessage = (text: string): boolean =>
  text.length >= 2 && text.length % 2 === 0 && /^[0-9a-fA-F]+$/.test(text);
