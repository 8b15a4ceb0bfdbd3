#!/usr/bin/env python3
"""End-to-end checks of the grm command line: exit codes, outputs, summary arithmetic."""

import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

GRM, CHECKER, CONFIGS = sys.argv[1], sys.argv[2], Path(sys.argv[3])
failures = 0


def expect(label, code, *args, env=None):
    global failures
    proc = subprocess.run([GRM, *args], capture_output=True, text=True, env=env)
    status = "ok" if proc.returncode == code else "FAIL"
    if proc.returncode != code:
        failures += 1
        print(proc.stdout, proc.stderr, sep="\n")
    print(f"{status}: {label} (exit {proc.returncode}, expected {code})")
    return proc


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    env = dict(os.environ, GRM_OUT=str(tmp / "out"))

    config = tmp / "small.toml"
    config.write_text(
        'name = "small"\n[agent]\nepisodes = 400\n'
        "[experiment]\nreplicates = 4\nwindow_start = 100\nwindow_end = 300\n"
    )
    expect("run small config", 0, "run", str(config), env=env)
    run_dir = tmp / "out" / "small"
    proc = subprocess.run([sys.executable, CHECKER, str(run_dir)], capture_output=True, text=True)
    print(proc.stdout.strip(), proc.stderr.strip())
    failures += proc.returncode != 0

    expect("plot run directory", 0, "plot", str(run_dir))
    for name in ("returns.svg", "lengths.svg", "policy_0.svg"):
        if not (run_dir / name).exists():
            failures += 1
            print(f"FAIL: {name} missing")

    expect("sweep two learning rates", 0, "sweep", str(config), "--param", "agent.lr=0.1,0.5",
           "--param", "agent.episodes=50", env=env)
    for tag in ("agent.lr=0.1,agent.episodes=50", "agent.lr=0.5,agent.episodes=50"):
        if not (tmp / "out" / "small" / tag / "summary.json").exists():
            failures += 1
            print(f"FAIL: sweep output {tag} missing")

    bad = tmp / "bad.toml"
    bad.write_text("[agent]\nlr = \"fast\"\nepisodez = 1\n")
    proc = expect("bad config", 2, "run", str(bad))
    if "agent.lr" not in proc.stderr or "agent.episodez" not in proc.stderr:
        failures += 1
        print("FAIL: config error does not list both keys")
    expect("unknown subcommand", 2, "frobnicate")
    expect("sweep without values", 2, "sweep", str(config), "--param", "agent.lr")

    expect("verify small sweep", 0, "verify", "--count", "5", "--seed", "3")
    expect("verify zero count", 2, "verify", "--count", "0")
    expect("verify raw finds counterexamples", 0, "verify", "--count", "3", "--spec", "raw")

    # Two-step chain where staying in the start state farms a large bonus.
    mdp = {
        "num_states": 3, "num_actions": 2, "gamma": 0.99, "horizon": 4, "terminal": [2],
        "initial": [{"state": 0, "prob": 1.0}],
        "transitions": [
            {"state": 0, "action": 0, "outcomes": [{"next": 1, "prob": 1.0, "reward": 0.0}]},
            {"state": 0, "action": 1, "outcomes": [{"next": 2, "prob": 1.0, "reward": 1.0}]},
            {"state": 1, "action": 0, "outcomes": [{"next": 1, "prob": 1.0, "reward": 0.0}]},
            {"state": 1, "action": 1, "outcomes": [{"next": 2, "prob": 1.0, "reward": 0.0}]},
        ],
    }
    mdp_path = tmp / "mdp.json"
    mdp_path.write_text(json.dumps(mdp))
    proc = expect("verify --mdp with pbim", 0, "verify", "--mdp", str(mdp_path), "--spec", "pbim")
    if json.loads(proc.stdout)["pass"] is not True:
        failures += 1
        print("FAIL: pbim report does not pass")
    expect("verify --mdp with raw bonus", 1, "verify", "--mdp", str(mdp_path), "--spec", "raw", "--alpha", "5")
    mdp_path.write_text("{\"num_states\": 2}")
    expect("verify --mdp malformed", 2, "verify", "--mdp", str(mdp_path))

    # Every shipped config parses and runs a couple of episodes.
    for shipped in sorted(CONFIGS.glob("*.toml")):
        expect(f"smoke {shipped.name}", 0, "sweep", str(shipped), "--param", "agent.episodes=3",
               "--param", "experiment.replicates=1", env=env)

print(f"{failures} failures")
sys.exit(1 if failures else 0)
