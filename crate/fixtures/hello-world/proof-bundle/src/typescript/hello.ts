// Writes the greeting through the raw stdout stream so that no
// console formatting or locale handling touches the bytes.

// Ambient declaration keeps the build free of @types/node.
declare const process: any;

const GREETING: string = "Hello, world!\n";

function main(): number {
  const written: boolean = process.stdout.write(GREETING);
  if (!written) {
    process.stdout.once("drain", () => undefined);
  }
  return 0;
}

process.exitCode = main();
