import numpy as np
import pytest

from lacamx import flowtime, sum_of_loss, validate_solution
from lacamx.cli import EXIT_INPUT_ERROR, EXIT_NO_SOLUTION, EXIT_SOLVED, main
from lacamx.io import (
    MapFormatError,
    ScenarioFormatError,
    format_solution,
    parse_map,
    parse_scen,
    parse_solution,
)
from gridgen import EMPTY_8_8, empty_map_text, grid_from_rows, scen_text


def test_parse_map_tiny():
    gmap = parse_map("type octile\nheight 2\nwidth 2\nmap\n..\n..\n")
    assert gmap.num_vertices == 4
    assert gmap.indices.shape[0] == 8  # 4 undirected edges


def test_parse_map_empty_8_8_vertex_count():
    gmap = parse_map(EMPTY_8_8)
    assert gmap.num_vertices == 64


def test_parse_map_glyphs():
    gmap = parse_map("type octile\nheight 2\nwidth 3\nmap\n.G@\nTO.\n")
    assert gmap.num_vertices == 3


def test_parse_map_ragged_row_errors_with_line():
    text = "type octile\nheight 2\nwidth 3\nmap\n...\n..\n"
    with pytest.raises(MapFormatError, match="line 6"):
        parse_map(text)


def test_parse_map_unknown_glyph():
    with pytest.raises(MapFormatError, match="line 5"):
        parse_map("type octile\nheight 1\nwidth 2\nmap\n.x\n")


def test_parse_map_wrong_row_count():
    with pytest.raises(MapFormatError):
        parse_map("type octile\nheight 3\nwidth 2\nmap\n..\n..\n")


def test_parse_scen_single_and_order():
    gmap = parse_map(empty_map_text(4, 4))
    text = scen_text(gmap, 6, seed=1)
    inst = parse_scen(text, gmap, 1)
    assert inst.num_agents == 1
    first = text.splitlines()[1].split()
    assert inst.starts[0] == gmap.vertex_at(int(first[4]), int(first[5]))


def test_parse_scen_too_few_entries():
    gmap = parse_map(empty_map_text(4, 4))
    text = scen_text(gmap, 3, seed=1)
    with pytest.raises(ScenarioFormatError, match="3"):
        parse_scen(text, gmap, 5)


def test_parse_scen_duplicate_start_rejected():
    gmap = parse_map(empty_map_text(4, 4))
    line = "0\tx\t4\t4\t{sx}\t{sy}\t{gx}\t{gy}\t0"
    text = "version 1\n" + "\n".join(
        [line.format(sx=0, sy=0, gx=1, gy=1), line.format(sx=0, sy=0, gx=2, gy=2)]
    )
    with pytest.raises(ScenarioFormatError, match="start"):
        parse_scen(text, gmap, 2)


def test_parse_scen_blocked_cell_rejected():
    gmap = parse_map("type octile\nheight 1\nwidth 3\nmap\n.@.\n")
    text = "version 1\n0\tx\t3\t1\t1\t0\t2\t0\t0\n"
    with pytest.raises(ScenarioFormatError, match="blocked"):
        parse_scen(text, gmap, 1)


def test_solution_round_trip_preserves_metrics():
    gmap = grid_from_rows(["...", "...", "..."])
    sol = [
        (gmap.vertex_at(0, 0), gmap.vertex_at(2, 2)),
        (gmap.vertex_at(1, 0), gmap.vertex_at(1, 2)),
        (gmap.vertex_at(2, 0), gmap.vertex_at(0, 2)),
    ]
    goals = sol[-1]
    text = format_solution(sol, gmap)
    back = parse_solution(text, gmap)
    assert back == sol
    assert sum_of_loss(back, goals) == sum_of_loss(sol, goals)
    assert flowtime(back, goals) == flowtime(sol, goals)


def run_cli(tmp_path, map_text, scen_lines, extra):
    mp = tmp_path / "m.map"
    sc = tmp_path / "s.scen"
    mp.write_text(map_text)
    sc.write_text(scen_lines)
    argv = ["--map", str(mp), "--scen", str(sc), "--out-dir", str(tmp_path)] + extra
    return main(argv), tmp_path


def test_cli_solves_and_writes_artifacts(tmp_path):
    gmap = parse_map(empty_map_text(4, 4))
    code, out = run_cli(
        tmp_path,
        empty_map_text(4, 4),
        scen_text(gmap, 4, seed=3),
        ["--agents", "3", "--time-limit-ms", "4000", "--seed", "1"],
    )
    assert code == EXIT_SOLVED
    sol = parse_solution((out / "solution.txt").read_text(), gmap)
    inst = parse_scen(scen_text(gmap, 4, seed=3), gmap, 3)
    assert validate_solution(inst, sol) is None
    csv_lines = (out / "anytime.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "elapsed_ms,sum_of_loss,flowtime,source"
    costs = [int(r.split(",")[1]) for r in csv_lines[1:]]
    assert costs == sorted(costs, reverse=True)
    assert len(set(costs)) == len(costs)  # strictly decreasing
    assert int(csv_lines[-1].split(",")[1]) == sum_of_loss(sol, inst.goals)


def test_cli_unsolvable_exit_code(tmp_path):
    map_text = "type octile\nheight 1\nwidth 2\nmap\n..\n"
    scen = "version 1\n0\tm\t2\t1\t0\t0\t1\t0\t0\n1\tm\t2\t1\t1\t0\t0\t0\t0\n"
    code, _ = run_cli(tmp_path, map_text, scen, ["--agents", "2"])
    assert code == EXIT_NO_SOLUTION


def test_cli_input_error_exit_code(tmp_path):
    code, _ = run_cli(
        tmp_path, "type octile\nheight 1\nwidth 2\nmap\n.x\n",
        "version 1\n", ["--agents", "1"],
    )
    assert code == EXIT_INPUT_ERROR


def test_cli_agents_exceed_scenario(tmp_path):
    gmap = parse_map(empty_map_text(3, 3))
    code, _ = run_cli(
        tmp_path, empty_map_text(3, 3), scen_text(gmap, 2, seed=0), ["--agents", "5"]
    )
    assert code == EXIT_INPUT_ERROR


def test_cli_byte_identical_solutions_same_seed(tmp_path):
    gmap = parse_map(empty_map_text(4, 4))
    scen = scen_text(gmap, 5, seed=9)
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        code, _ = run_cli(
            d,
            empty_map_text(4, 4),
            scen,
            ["--agents", "4", "--seed", "5", "--time-limit-ms", "8000",
             "--preset", "no-refiners"],
        )
        assert code == EXIT_SOLVED
        outs.append((d / "solution.txt").read_bytes())
    assert outs[0] == outs[1]


def test_cli_preset_vanilla_flags(tmp_path):
    from lacamx.cli import build_parser, config_from_args

    args = build_parser().parse_args(
        ["--map", "m", "--scen", "s", "--agents", "1", "--preset", "vanilla"]
    )
    cfg = config_from_args(args)
    assert cfg.mc_samples == 1
    assert cfg.suo_margin == -1
    assert cfg.refiners == 0
    assert cfg.extract_prob == 0.0


def test_cli_preset_all_flags():
    from lacamx.cli import build_parser, config_from_args

    args = build_parser().parse_args(
        ["--map", "m", "--scen", "s", "--agents", "1", "--preset", "all"]
    )
    cfg = config_from_args(args)
    assert cfg.extract_prob == 0.01
    assert cfg.extract_strategy == "random"
    assert cfg.suo_margin == 2
    assert cfg.mc_samples == 10
    assert cfg.refiners == 4
    assert cfg.recursive_prob == 0.2


def test_cli_ablation_presets():
    from lacamx.cli import build_parser, config_from_args

    base = ["--map", "m", "--scen", "s", "--agents", "1", "--preset"]
    parser = build_parser()
    assert config_from_args(parser.parse_args(base + ["no-suo"])).suo_margin == -1
    assert config_from_args(parser.parse_args(base + ["no-mc"])).mc_samples == 1
    assert config_from_args(parser.parse_args(base + ["no-refiners"])).refiners == 0
    no_ex = config_from_args(parser.parse_args(base + ["no-extract"]))
    assert no_ex.extract_prob == 0.0
    # explicit flags override the preset
    over = config_from_args(
        parser.parse_args(base + ["all", "--mc-samples", "3", "--suo-margin", "0"])
    )
    assert over.mc_samples == 3 and over.suo_margin == 0
