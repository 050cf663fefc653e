import io
from pathlib import Path

import pandas as pd
import pytest

from cli import main
from services.metrics_service import CSV_COLUMNS

SCENARIOS = Path(__file__).resolve().parent.parent / 'scenarios'
SHORT = ['--duration', '150', '--set', 'burst_cap=200']


def _read(text):
    return pd.read_csv(io.StringIO(text))


def test_calc_prints_closed_form_table(capsys):
    assert main(['calc', '10', '1000']) == 0
    table = _read(capsys.readouterr().out)
    row = table.iloc[0]
    assert row['fach_cbr_s'] == pytest.approx(8.888, abs=0.01)
    assert row['fach_no_cbr_s'] == pytest.approx(2.424, abs=0.01)
    assert row['dch_setup_s'] == pytest.approx(0.458, abs=0.001)


def test_calc_rejects_zero_packets(capsys):
    assert main(['calc', '0', '1000']) == 1
    assert 'n_packets' in capsys.readouterr().err


def test_run_rejects_zero_dch(capsys):
    assert main(['run', '--n-dch', '0']) == 1
    assert 'n_dch' in capsys.readouterr().err


def test_unknown_override_key(capsys):
    assert main(['run', '--set', 'n_dchs=1']) == 1


def test_bad_flag_is_a_validation_error():
    assert main(['run', '--scheduler', 'fifo']) == 1


def test_run_writes_one_row_with_stable_header(tmp_path):
    out = tmp_path / 'run.csv'
    assert main(['run', '--seed', '5', '--out', str(out)] + SHORT) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ','.join(CSV_COLUMNS)
    assert len(lines) == 2
    row = _read(out.read_text()).iloc[0]
    assert row['seed'] == 5
    assert row['mean_response_s'] > 0


def test_run_is_deterministic(tmp_path):
    for name in ('a', 'b'):
        argv = ['run', '--seed', '42', '--policy', 'fsdch', '--out', str(tmp_path / f'{name}.csv'),
                '--trace', str(tmp_path / f'{name}.trace')] + SHORT
        assert main(argv) == 0
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()
    assert (tmp_path / 'a.trace').read_bytes() == (tmp_path / 'b.trace').read_bytes()


def test_run_with_config_file(tmp_path):
    scenario = tmp_path / 'scenario.env'
    scenario.write_text("N_TCP=3\nPOLICY=QSFS\nDURATION=150\nBURST_CAP=200\n")
    out = tmp_path / 'run.csv'
    assert main(['run', '--config', str(scenario), '--out', str(out)]) == 0
    row = _read(out.read_text()).iloc[0]
    assert row['n_tcp'] == 3
    assert row['policy'] == 'QSFS'


def test_run_with_audit(tmp_path):
    assert main(['run', '--audit', '--out', str(tmp_path / 'r.csv')] + SHORT) == 0


def test_sweep_rows_and_aggregates(tmp_path):
    out = tmp_path / 'sweep.csv'
    argv = ['sweep', '--policies', 'FS,FSDCH', '--values', '2,5', '--seeds', '1,2', '--out', str(out)] + SHORT
    assert main(argv) == 0
    rows = _read(out.read_text())
    assert list(rows.columns) == list(CSV_COLUMNS)
    assert len(rows) == 8
    assert list(rows['policy']) == ['FS'] * 4 + ['FSDCH'] * 4
    assert list(rows['s']) == [2, 2, 5, 5] * 2
    assert list(rows['seed']) == [1, 2] * 4

    summary = _read((tmp_path / 'sweep.csv.summary.csv').read_text())
    assert len(summary) == 4
    assert (summary['seeds'] == 2).all()
    assert summary['mean_response_s_sem'].notna().all()


def test_sweep_uses_each_policys_threshold(tmp_path):
    out = tmp_path / 'sweep.csv'
    argv = ['sweep', '--policies', 'QS,FS+LAS', '--values', '3', '--seeds', '1', '--out', str(out)] + SHORT
    assert main(argv) == 0
    rows = _read(out.read_text())
    assert list(rows['t_h']) == [3, 4]
    assert list(rows['s']) == [5, 3]
    assert list(rows['scheduler']) == ['PS', 'LAS']


def test_sweep_workers_keep_order(tmp_path):
    argv = ['--policies', 'QS,FS', '--values', '2,4', '--seeds', '1'] + SHORT
    assert main(['sweep', '--out', str(tmp_path / 'serial.csv')] + argv) == 0
    assert main(['sweep', '--workers', '2', '--out', str(tmp_path / 'parallel.csv')] + argv) == 0
    assert (tmp_path / 'serial.csv').read_bytes() == (tmp_path / 'parallel.csv').read_bytes()


def test_compare_ranks_policies(tmp_path, caplog):
    out = tmp_path / 'compare.csv'
    argv = ['compare', '--policies', 'QS,FSDCH,MT', '--values', '2,6', '--seeds', '3', '--out', str(out)] + SHORT
    assert main(argv) == 0
    ranking = _read(out.read_text())
    assert len(ranking) == 3
    assert list(ranking['rank']) == [1, 2, 3]
    assert ranking['gain_of_best'].iloc[0] == 0
    assert (ranking['gain_of_best'] >= 0).all()
    assert ranking['mean_response_s'].is_monotonic_increasing
    # single seed: no standard error
    assert ranking['mean_response_s_sem'].isna().all()


def test_compare_needs_two_policies(capsys):
    assert main(['compare', '--policies', 'QS', '--values', '2', '--seeds', '1'] + SHORT) == 1


def test_compare_matrix(tmp_path):
    out = tmp_path / 'matrix.csv'
    best = tmp_path / 'best.csv'
    argv = ['compare', '--policies', 'QS,FS', '--values', '4', '--seeds', '1', '--n-tcp', '2', '3',
            '--out', str(out), '--summary-out', str(best)] + SHORT
    assert main(argv) == 0
    assert len(_read(out.read_text())) == 4
    table = _read(best.read_text())
    assert list(table['n_tcp']) == [2, 3]
    assert set(table['best_policy']) <= {'QS', 'FS'}


def test_store_saves_runs(tmp_path):
    from app import create_app
    from models.RunRecord import RunRecord

    url = f"sqlite:///{tmp_path / 'runs.db'}"
    assert main(['run', '--seed', '4', '--store', url, '--out', str(tmp_path / 'r.csv')] + SHORT) == 0
    app = create_app(database_url=url)
    with app.app_context():
        records = RunRecord.find_filtered()
        assert len(records) == 1
        assert records[0].seed == 4


def test_injected_burst_on_pinned_dch(tmp_path):
    out = tmp_path / 'dch.csv'
    argv = ['run', '--config', str(SCENARIOS / 'validation_dch.env'), '--inject', '0:10@0', '--out', str(out)]
    assert main(argv) == 0
    row = _read(out.read_text()).iloc[0]
    assert row['n_bursts'] == 1
    assert row['mean_response_s'] == pytest.approx(0.458, rel=0.02)


def test_bad_inject_spec():
    assert main(['run', '--inject', 'ten']) == 1


def test_workers_default_comes_from_environment(monkeypatch):
    from cli import build_parser
    from config.env import Config

    monkeypatch.setattr(Config, 'SIM_WORKERS', 3)
    assert build_parser().parse_args(['sweep']).workers == 3
    assert build_parser().parse_args(['sweep', '--workers', '1']).workers == 1
