#!/usr/bin/env python3
# Copyright 2026 The warp-lens Authors.
# SPDX-License-Identifier: Apache-2.0
"""Compile tests/corpus/*.wat to .wasm with an external assembler (wasmtime)."""
import pathlib
import sys

import wasmtime

root = pathlib.Path(__file__).resolve().parent.parent / "tests" / "corpus"
for wat in sorted(root.glob("*.wat")):
    wasm = wasmtime.wat2wasm(wat.read_text())
    wat.with_suffix(".wasm").write_bytes(bytes(wasm))
    print(f"{wat.name}: {len(wasm)} bytes", file=sys.stderr)
