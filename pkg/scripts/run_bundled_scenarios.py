"""Run the analytic subcommands on every bundled scenario"""
import sys
from pathlib import Path

# Add parent directory to path to import swiftdeco modules
sys.path.append(str(Path(__file__).parent.parent))

from swiftdeco.main import main
from swiftdeco.services.scenario_service import ScenarioService

COMMANDS = ("moments", "rates", "evolve")


def run_all(out_root: Path) -> int:
    """Run each command on each bundled scenario into out_root/<scenario>"""
    failures = 0
    for name in ScenarioService.list_bundled():
        for command in COMMANDS:
            code = main([command, name, "--out-dir", str(out_root / name)])
            status = "ok" if code == 0 else f"exit {code}"
            print(f"{name:16s} {command:10s} {status}")
            failures += code != 0
    return failures


if __name__ == "__main__":
    out_root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    sys.exit(1 if run_all(out_root) else 0)
