from __future__ import annotations

from bvqo.cli import launch_cli


if __name__ == "__main__":
    raise SystemExit(launch_cli())
