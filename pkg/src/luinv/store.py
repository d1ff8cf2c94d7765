"""Flat-directory store of fingerprint records keyed by canonical hash."""
import json
import os
from datetime import datetime, timezone

from .invariants import fingerprint_key, fingerprint_to_dict
from .io import atomic_write


class FingerprintStore:
    """One ``<key>.json`` file per local-unitary class seen so far."""

    def __init__(self, root):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def path(self, key):
        return os.path.join(self.root, f"{key}.json")

    def __contains__(self, key):
        return os.path.exists(self.path(key))

    def get(self, key):
        with open(self.path(key), "r", encoding="utf-8") as fh:
            return json.load(fh)

    def keys(self):
        return sorted(f[:-5] for f in os.listdir(self.root)
                      if f.endswith(".json") and not f.startswith("."))

    def put(self, fp, label=""):
        """Insert a record unless its key already exists; return (key, hit)."""
        key = fingerprint_key(fp)
        if key in self:
            return key, True
        record = {
            "key": key,
            "fingerprint": fingerprint_to_dict(fp),
            "label": label,
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        atomic_write(self.path(key), json.dumps(record, indent=1) + "\n")
        return key, False
