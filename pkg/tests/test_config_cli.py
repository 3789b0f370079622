"""Scenario files and the command line front end."""
import numpy as np
import pytest

from diversim import ConfigError, InitialAlgo, Strategy, load_scenario
from diversim.cli import main
from diversim.engine import NetworkFiles, SyntheticNetwork, resolve_graph


BASE_YAML = """\
network:
  synthetic: {{n_layer1: 14, n_layer2: 12, overlap_fraction: 0.5, attachment_degree: 2, seed: 3}}
diversity:
  x: {x}
attacker:
  m3: 1
  m4: 2
  ini_comp: 2
defender:
  strategy: {strategy}
{extra}run:
  t_max: 10
  runs: 3
  seed: 1
"""


def write_config(tmp_path, strategy="static", x=3, extra="", name="scn.yaml"):
    path = tmp_path / name
    path.write_text(BASE_YAML.format(strategy=strategy, x=x, extra=extra))
    return path


# --- scenario files ------------------------------------------------------------------

def test_load_minimal_scenario(tmp_path):
    cfg = load_scenario(write_config(tmp_path))
    scn = cfg.scenario
    assert isinstance(scn.network, SyntheticNetwork)
    assert scn.pool.hbar == 3 and scn.pool.x == 3
    assert scn.q == 1.0
    assert scn.attacker.m3 == 1 and scn.attacker.initial_compromise_size == 2
    assert scn.defender.strategy is Strategy.STATIC
    assert scn.defender.tau == pytest.approx(1 / 3)
    assert scn.defender.initial_algo is InitialAlgo.DEGREE_PRIORITY
    assert (scn.t_max, scn.runs, scn.seed) == (10, 3, 1)
    assert cfg.scale_attacker_with_q and cfg.attacker_q_fraction == 0.5


def test_load_files_network(tmp_path):
    (tmp_path / "l1.edges").write_text("0 1\n1 2\n")
    (tmp_path / "l2.edges").write_text("0 2\n")
    path = tmp_path / "scn.yaml"
    path.write_text(
        "network:\n"
        f"  files: {{layers: [{tmp_path}/l1.edges, {tmp_path}/l2.edges]}}\n"
        "diversity: {x: 2, hbar: 3}\n"
        "attacker: {m3: 1, m4: 2, ini_comp: 1}\n"
        "defender: {strategy: static}\n"
    )
    cfg = load_scenario(path)
    assert isinstance(cfg.scenario.network, NetworkFiles)
    g = resolve_graph(cfg.scenario.network)
    assert g.n_computers == 3 and g.hbar == 3


def test_hbar_cross_check(tmp_path):
    path = write_config(tmp_path)
    text = path.read_text().replace("x: 3", "x: 3\n  hbar: 4")
    path.write_text(text)
    with pytest.raises(ConfigError, match="implies 3"):
        load_scenario(path)


def test_network_source_is_exclusive(tmp_path):
    path = tmp_path / "scn.yaml"
    path.write_text(
        "network:\n"
        "  synthetic: {n_layer1: 10, n_layer2: 10, overlap_fraction: 0.5}\n"
        "  files: {layers: [x.edges]}\n"
        "diversity: {x: 2}\n"
        "attacker: {m3: 1, m4: 1}\n"
        "defender: {strategy: static}\n"
    )
    with pytest.raises(ConfigError, match="exactly one"):
        load_scenario(path)


def test_strategy_list_with_shared_knobs(tmp_path):
    extra = (
        "  eta1: 0.5\n"
        "  eta2: 0.2\n"
        "  fpr: 0.1\n"
        "  fnr: 0.1\n"
    )
    path = write_config(tmp_path, strategy="[static, proactive, hybrid]", extra=extra)
    cfg = load_scenario(path)
    by_name = {s.strategy: s for s in cfg.defenders}
    assert set(by_name) == {Strategy.STATIC, Strategy.PROACTIVE, Strategy.HYBRID}
    # knobs are picked per strategy from the shared pool
    assert by_name[Strategy.STATIC].eta1 is None
    assert by_name[Strategy.PROACTIVE].eta1 == 0.5
    assert by_name[Strategy.PROACTIVE].fpr is None
    assert by_name[Strategy.HYBRID].fpr == 0.1
    assert by_name[Strategy.HYBRID].eta1 is None


def test_single_strategy_rejects_foreign_knobs(tmp_path):
    path = write_config(tmp_path, strategy="static", extra="  eta1: 0.5\n")
    with pytest.raises(ConfigError, match="leave eta1 unset"):
        load_scenario(path)


def test_reactive_alias(tmp_path):
    extra = "  fpr: 0.1\n  fnr: 0.1\n"
    for name in ("reactive", "reactive_adaptive"):
        cfg = load_scenario(write_config(tmp_path, strategy=name, extra=extra))
        assert cfg.defenders[0].strategy is Strategy.REACTIVE_ADAPTIVE


@pytest.mark.parametrize(
    "mutation,match",
    [
        (lambda s: s.replace("strategy: static", "strategy: fortress"), "unknown strategy"),
        (lambda s: s.replace("  x: 3", "  x: 0"), "implementation"),
        (lambda s: s.replace("m3: 1", "m3: -1"), "non-negative"),
        (lambda s: s.replace("diversity:\n  x: 3\n", ""), "diversity"),
        (lambda s: s + "telemetry: {}\n", "unknown section"),
        (lambda s: s.replace("  t_max: 10", "  t_max: 10\n  warp: 1"), "warp"),
        (lambda s: s.replace("  x: 3", "  x: 3\n  initial_algo: psychic"), "initial_algo"),
    ],
)
def test_config_rejections(tmp_path, mutation, match):
    path = write_config(tmp_path)
    path.write_text(mutation(path.read_text()))
    with pytest.raises(ConfigError, match=match):
        load_scenario(path)


def test_infeasible_catalog_rejected(tmp_path):
    path = write_config(tmp_path)
    path.write_text(path.read_text().replace("m3: 1", "m3: 9"))
    with pytest.raises(ConfigError, match="m3"):
        load_scenario(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_scenario(tmp_path / "nope.yaml")


# --- gen-network -----------------------------------------------------------------------

def test_gen_network_writes_layers(tmp_path, capsys):
    out = tmp_path / "net"
    code = main(["gen-network", "--out", str(out), "--n1", "20", "--n2", "15",
                 "--overlap", "0.4", "--attachment", "2", "--seed", "5"])
    assert code == 0
    printed = capsys.readouterr().out
    assert "layer1: 20 users" in printed
    assert "union: 29 users" in printed  # 20 + 15 - round(0.4 * 15)
    for name in ("layer1.edges", "layer2.edges", "users.txt"):
        assert (out / name).exists()
    g = resolve_graph(NetworkFiles(
        (str(out / "layer1.edges"), str(out / "layer2.edges")),
        str(out / "users.txt"),
    ))
    assert g.n_computers == 29


# --- run -------------------------------------------------------------------------------

def test_run_single_strategy(tmp_path):
    cfgp = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfgp), "--out", str(out)]) == 0
    trace = (out / "trace.csv").read_text()
    assert trace.splitlines()[0] == "t,cc,vc,ic,oc,new_compromised"
    assert len(trace.splitlines()) == 1 + 11
    summary = (out / "summary.csv").read_text()
    assert "static," in summary and ",awd," in summary and ",aoc," in summary


def test_run_deterministic_outputs(tmp_path):
    cfgp = write_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["run", "--config", str(cfgp), "--out", str(out1)])
    main(["run", "--config", str(cfgp), "--out", str(out2), "--jobs", "2"])
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()
    assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()


def test_run_seed_override_changes_trace(tmp_path):
    cfgp = write_config(tmp_path, strategy="static")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["run", "--config", str(cfgp), "--out", str(out1)])
    main(["run", "--config", str(cfgp), "--out", str(out2), "--seed", "99"])
    assert (out1 / "trace.csv").read_bytes() != (out2 / "trace.csv").read_bytes()


def test_run_strategy_family_with_baseline(tmp_path):
    extra = "  fpr: 0.0\n  fnr: 0.0\n"
    cfgp = write_config(tmp_path, strategy="[static, reactive, monoculture]",
                        x=3, extra=extra)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfgp), "--out", str(out), "--snapshot"]) == 0
    for name in ("trace_static.csv", "trace_reactive.csv", "trace_monoculture.csv",
                 "snapshot_static.csv"):
        assert (out / name).exists()
    summary = (out / "summary.csv").read_text()
    assert ",asd," in summary


# --- sweep -----------------------------------------------------------------------------

def test_sweep_tau_adds_baseline_and_slowdown(tmp_path):
    cfgp = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfgp), "--out", str(out),
                 "--sweep", "tau=0.1:0.3:0.1"]) == 0
    sweep_lines = (out / "sweep.csv").read_text().splitlines()
    # 3 taus for the configured strategy plus the implicit baseline
    assert len(sweep_lines) == 1 + 3 * 2
    assert any(",monoculture," in ln or ln.startswith("monoculture") for ln in sweep_lines[1:])
    summary = (out / "summary.csv").read_text()
    assert ",asd," in summary


def test_sweep_q_reports_tolerance(tmp_path):
    cfgp = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfgp), "--out", str(out),
                 "--sweep", "q=0:1:0.5"]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 1 + 3
    summary = (out / "summary.csv").read_text().splitlines()
    assert len(summary) == 2
    assert summary[1].startswith("static,") and ",vt," in summary[1]


def test_sweep_budget_reports_extra_cost(tmp_path):
    cfgp = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfgp), "--out", str(out),
                 "--sweep", "budget=0:6:2"]) == 0
    summary = (out / "summary.csv").read_text()
    assert ",aec," in summary


def test_sweep_multi_key_cartesian(tmp_path):
    cfgp = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfgp), "--out", str(out),
                 "--sweep", "q=0.5:1:0.5", "--sweep", "ini_comp=1:2:1"]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 1 + 4
    assert "q+ini_comp" in lines[1]
    assert "0.5;1" in lines[1]


def test_sweep_accepts_section_prefixes(tmp_path):
    cfgp = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfgp), "--out", str(out),
                 "--sweep", "defender.tau=0.2:0.3:0.1"]) == 0


def test_sweep_rejections(tmp_path, capsys):
    cfgp = write_config(tmp_path)
    out = tmp_path / "out"
    cases = [
        ["--sweep", "gamma=0:1:0.5"],
        ["--sweep", "tau"],
        ["--sweep", "tau=0.5:0.1:0.1"],
        ["--sweep", "q=0:1:0.5", "--sweep", "q=0:1:0.5"],
    ]
    for extra in cases:
        code = main(["sweep", "--config", str(cfgp), "--out", str(out)] + extra)
        assert code == 2
        assert "error:" in capsys.readouterr().err


def test_bad_config_exits_two(tmp_path, capsys):
    cfgp = write_config(tmp_path, strategy="fortress")
    assert main(["run", "--config", str(cfgp), "--out", str(tmp_path / "o")]) == 2
    assert "unknown strategy" in capsys.readouterr().err


def test_unwritable_out_exits_three(tmp_path, capsys):
    cfgp = write_config(tmp_path)
    blocker = tmp_path / "blocked"
    blocker.write_text("")
    code = main(["run", "--config", str(cfgp), "--out", str(blocker / "sub")])
    assert code == 3
    assert "error:" in capsys.readouterr().err
