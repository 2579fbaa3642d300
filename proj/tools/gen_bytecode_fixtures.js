// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.
//
// Regenerates tests/fixtures/bytecode/*.hex and *.abi.json from tools/fixtures_src.
// Usage: NODE_PATH=<dir with solc@0.8.19> node tools/gen_bytecode_fixtures.js
'use strict';
const fs = require('fs');
const path = require('path');
const solc = require('solc');

const root = path.resolve(__dirname, '..');
const srcDir = path.join(__dirname, 'fixtures_src');
const outDir = path.join(root, 'tests', 'fixtures', 'bytecode');

const sources = {};
for (const f of fs.readdirSync(srcDir).filter((n) => n.endsWith('.sol')).sort()) {
  sources[f] = { content: fs.readFileSync(path.join(srcDir, f), 'utf8') };
}
const input = {
  language: 'Solidity',
  sources,
  settings: {
    optimizer: { enabled: false },
    evmVersion: 'paris',
    outputSelection: { '*': { '*': ['evm.bytecode.object', 'evm.deployedBytecode.object', 'evm.methodIdentifiers'] } },
  },
};
const out = JSON.parse(solc.compile(JSON.stringify(input)));
for (const e of out.errors || []) {
  if (e.severity === 'error') throw new Error(e.formattedMessage);
}
for (const file of Object.keys(out.contracts).sort()) {
  for (const name of Object.keys(out.contracts[file]).sort()) {
    const c = out.contracts[file][name];
    fs.writeFileSync(path.join(outDir, `${name}.runtime.hex`), `0x${c.evm.deployedBytecode.object}\n`);
    fs.writeFileSync(path.join(outDir, `${name}.creation.hex`), `0x${c.evm.bytecode.object}\n`);
    const ids = {};
    for (const [sig, sel] of Object.entries(c.evm.methodIdentifiers).sort()) ids[sig] = `0x${sel}`;
    fs.writeFileSync(path.join(outDir, `${name}.selectors.json`), `${JSON.stringify(ids, null, 2)}\n`);
  }
}
console.log(`solc ${solc.version()}`);
