"""Print the propagation trace of c:c+1 under the two injected stimuli and
mark which events match the reference rows."""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from golden import match_rows, run_c_plus_1  # noqa: E402
from qtype.signatures import load_signatures  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--signatures", default=None)
    args = ap.parse_args()
    _, store, x, elapsed = run_c_plus_1(load_signatures(args.signatures))
    rows = {step: label for label, step in match_rows(store.trace) if step is not None}
    for ev in store.trace:
        mark = f"   <- {rows[ev.step]}" if ev.step in rows else ""
        print(ev.text() + mark)
    missing = [label for label, step in match_rows(store.trace) if step is None]
    print(f"\n{len(rows)} rows matched, {len(missing)} missing, {elapsed * 1000:.1f} ms")
    for label in missing:
        print("missing:", label)
    return 1 if missing else 0


if __name__ == "__main__":
    sys.exit(main())
