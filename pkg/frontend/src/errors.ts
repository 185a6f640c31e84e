/** Input does not match the figure being rendered (wrong preset/columns). */
export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatch";
  }
}

/** Input parses but carries no data rows; nothing is written. */
export class EmptyData extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EmptyData";
  }
}
