"""The command-line workflow end to end, driven in process.

Writes a parameter set to disk in the toolkit's file formats, then runs
certify, solve and a counterfactual exactly as `scalefix ...` would
from a shell, and shows the files that come back."""

import tempfile
from pathlib import Path

import numpy as np

from scalefix import OneSectorParams
from scalefix.cli import main
from scalefix.modelio import save_parameters

params = OneSectorParams(
    A=np.array([1.0, 1.2, 0.9]),
    tau=np.array([
        [1.0, 1.4, 1.8],
        [1.4, 1.0, 1.5],
        [1.8, 1.5, 1.0],
    ]),
    gamma=np.array([0.6, 0.5, 0.7]),
    L=np.array([1.0, 1.5, 0.8]),
    theta=5.0,
    sigma=2.2,
)

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    config = save_parameters(params, str(root / "inputs"))
    print("files written by the parameter serializer:")
    for f in sorted((root / "inputs").iterdir()):
        print(f"  {f.name}")
    print()

    out = root / "run"
    print("$ scalefix certify --config", Path(config).name)
    code = main(["certify", "--config", config, "--out", str(out)])
    print(f"(exit {code})")
    print()

    print("$ scalefix solve ...")
    code = main(["solve", "--config", config, "--out", str(out)])
    print(f"(exit {code})")
    print()

    shocks = root / "shocks.txt"
    shocks.write_text("# all trade with country 3 gets costlier\n"
                      "tau[1][3] *= 1.25\n"
                      "tau[3][1] *= 1.25\n"
                      "tau[2][3] *= 1.25\n"
                      "tau[3][2] *= 1.25\n")
    print("$ scalefix counterfactual ... --shocks shocks.txt")
    code = main(["counterfactual", "--config", config,
                 "--shocks", str(shocks), "--out", str(out)])
    print(f"(exit {code})")
    print()

    print("first lines of each output file:")
    for name in ("report.txt", "equilibrium.txt", "trace.csv", "deltas.txt"):
        lines = (out / name).read_text().splitlines()
        print(f"  {name}: {lines[0]}")
    print()

    print("$ scalefix report report.txt")
    main(["report", str(out / "report.txt")])
