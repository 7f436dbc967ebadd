"""Run manifests: every pipeline stage records its config, seed and the
SHA-256 of each file it wrote, so a stage can be re-run exactly."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

MANIFEST_NAME = "manifest.json"


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: str | Path, stage: str, config: dict,
                   outputs: list[str | Path], seed: int | None = None,
                   extra: dict | None = None, force: bool = False) -> Path:
    """Write manifest.json in out_dir.  Refuses to clobber a manifest from a
    different stage unless force is set."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / MANIFEST_NAME
    if path.exists() and not force:
        existing = json.loads(path.read_text("utf-8"))
        if existing.get("stage") != stage:
            raise FileExistsError(
                f"{path} already holds a {existing.get('stage')!r} manifest; use --force"
            )
    manifest = {
        "stage": stage,
        "seed": seed,
        "config": config,
        "outputs": {
            str(Path(p).relative_to(out_dir)): sha256_file(p) for p in outputs
        },
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
    return path


def read_manifest(out_dir: str | Path) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text("utf-8"))
