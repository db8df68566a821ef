# %% [markdown]
# # Running bundled configurations
#
# The command-line entry point reads a JSON configuration and writes CSV and
# JSON files.  The same runner is callable from Python.

# %%
import json
import tempfile
from pathlib import Path

from ptrg.cli import bundled_configs, run

print(bundled_configs())

# %%
out = Path(tempfile.mkdtemp())
code = run("bundled:couplings", out)
print("exit code:", code)
print((out / "couplings.csv").read_text().splitlines()[:4])
print(json.loads((out / "summary.json").read_text())["metrics"])
