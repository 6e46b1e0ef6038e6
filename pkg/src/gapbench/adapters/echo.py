#!/usr/bin/env python3
"""Reference adapter: repeats the last history value over the horizon.

Useful for protocol conformance checks — piped through the bidirectional
pipeline it must reproduce the padded-last baseline exactly.
"""

import json
import sys


def main() -> int:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            history = req["history"]
            horizon = int(req["horizon"])
            out = {"id": req["id"], "values": [float(history[-1])] * horizon}
        except Exception as exc:  # malformed request -> error response
            rid = None
            try:
                rid = req.get("id")
            except Exception:
                pass
            out = {"id": rid, "error": f"bad request: {exc}"}
        sys.stdout.write(json.dumps(out, separators=(",", ":")) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
