"""Artifact loading with config-hash verification and schema checks."""

from __future__ import annotations

import json
from pathlib import Path


class HashMismatch(RuntimeError):
    """Input artifact was produced by a different configuration."""


class SchemaError(RuntimeError):
    """Input artifact is missing an expected column or header."""


class Table:
    """Parsed CSV artifact: column arrays plus `# key=value` metadata."""

    def __init__(self, columns, meta):
        self.columns = columns
        self.meta = meta

    def __getitem__(self, name):
        return self.columns[name]

    def column(self, name, kind=float):
        return [kind(v) for v in self.columns[name]]


def load_manifest(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != "spinkernel-manifest-v1":
        raise SchemaError(f"{path}: not a spinkernel manifest")
    return doc


def artifact_path(manifest_path, name: str) -> Path:
    return Path(manifest_path).parent / name


def read_csv(path, expected_hash: str, required_columns) -> Table:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "# spinkernel-csv v1":
        raise SchemaError(f"{path}: missing 'spinkernel-csv v1' header")
    meta = {}
    i = 1
    while i < len(lines) and lines[i].startswith("# "):
        for token in lines[i][2:].split():
            if "=" in token:
                key, value = token.split("=", 1)
                meta[key] = value
        i += 1
    got = meta.get("config-hash")
    if got != expected_hash:
        raise HashMismatch(
            f"{path}: config hash {got!r} does not match manifest "
            f"{expected_hash!r}")
    header = lines[i].split(",")
    for col in required_columns:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r}")
    columns = {name: [] for name in header}
    for line in lines[i + 1:]:
        if not line:
            continue
        for name, value in zip(header, line.split(",")):
            columns[name].append(value)
    return Table(columns, meta)


def read_json(path, expected_hash: str) -> dict:
    doc = json.loads(Path(path).read_text())
    got = doc.get("config_hash")
    if got != expected_hash:
        raise HashMismatch(
            f"{path}: config hash {got!r} does not match manifest "
            f"{expected_hash!r}")
    return doc


def gram_table(path, expected_hash: str):
    """Gram CSV: labeled header row, then the square matrix row-major."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "# spinkernel-csv v1":
        raise SchemaError(f"{path}: missing 'spinkernel-csv v1' header")
    meta = {}
    i = 1
    while i < len(lines) and lines[i].startswith("# "):
        for token in lines[i][2:].split():
            if "=" in token:
                key, value = token.split("=", 1)
                meta[key] = value
        i += 1
    if meta.get("config-hash") != expected_hash:
        raise HashMismatch(
            f"{path}: config hash {meta.get('config-hash')!r} does not "
            f"match manifest {expected_hash!r}")
    labels = lines[i].split(",")
    rows = [[float(v) for v in line.split(",")]
            for line in lines[i + 1:] if line]
    if len(rows) != len(labels):
        raise SchemaError(f"{path}: expected a {len(labels)}-row matrix")
    return labels, rows, meta
