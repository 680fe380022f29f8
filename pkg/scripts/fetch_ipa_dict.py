# scripts/fetch_ipa_dict.py
from __future__ import annotations
import argparse
import os
import sys

import requests

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from g2p_complexity import config
from g2p_complexity.reference import REFERENCE_ROWS

IPA_DICT_BASE = "https://raw.githubusercontent.com/open-dict-data/ipa-dict/master/data"


def ensure_data_dir(path: str | None = None) -> str:
    data = path or config.DATA_DIR
    os.makedirs(data, exist_ok=True)
    return data


def fetch_language(tag: str, data_dir: str, force: bool = False) -> str:
    out = os.path.join(data_dir, f"{tag}.txt")
    if os.path.exists(out) and not force:
        print(f"[fetch] {tag}: cached at {out}")
        return out
    r = requests.get(f"{IPA_DICT_BASE}/{tag}.txt", timeout=60)
    r.raise_for_status()
    with open(out, "wb") as f:
        f.write(r.content)
    print(f"[fetch] wrote {out} ({len(r.content)} bytes)")
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description="Download ipa-dict wordlists")
    ap.add_argument("tags", nargs="*", help="language tags (default: the 22 reported languages)")
    ap.add_argument("--data-dir", default=None)
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()
    data_dir = ensure_data_dir(args.data_dir)
    failed = []
    for tag in args.tags or [row.tag for row in REFERENCE_ROWS]:
        try:
            fetch_language(tag, data_dir, args.force)
        except requests.RequestException as e:
            print(f"[fetch] {tag} failed: {e}")
            failed.append(tag)
    sys.exit(1 if failed else 0)
