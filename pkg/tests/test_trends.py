# Desk-scale trend checks against the published behaviour (RUN_SLOW=1)
#
# Every cell is written to TREND_REPORT_DIR (per-run rows with seeds plus the
# ranking table) before any assertion runs, so a failing trend is reported
# with its measured numbers.
import os
import time
from pathlib import Path

import pandas as pd
import pytest

from config.scenario import DEFAULT_SWEEP_VALUES, ScenarioConfig
from services.experiment_service import aggregate_runs, compare, write_table

pytestmark = pytest.mark.slow

SEEDS = [int(s) for s in os.environ.get('TREND_SEEDS', '1,2,3,4,5').split(',')]
DURATION = float(os.environ.get('TREND_DURATION', 20000))
WORKERS = int(os.environ.get('SIM_WORKERS', os.cpu_count() or 1))
REPORT_DIR = Path(os.environ.get('TREND_REPORT_DIR', 'trend_results'))
MAIN = ['QS', 'FS', 'QSFS', 'FSDCH']

# only the cells the checks below read; MT is needed at N_tcp=5 only
CELLS = {
    (2, 1): MAIN,
    (3, 1): MAIN,
    (5, 1): MAIN + ['MT'],
    (5, 2): MAIN + ['MT'],
}


def _measure(n_tcp, n_dch):
    base = ScenarioConfig(n_tcp=n_tcp, n_dch=n_dch, duration=DURATION)
    started = time.perf_counter()
    frame, ranking = compare(CELLS[n_tcp, n_dch], base, SEEDS, DEFAULT_SWEEP_VALUES, workers=WORKERS)
    ranking['wall_s'] = time.perf_counter() - started
    ranking['seed_list'] = ' '.join(str(s) for s in SEEDS)
    REPORT_DIR.mkdir(parents=True, exist_ok=True)
    write_table(frame, REPORT_DIR / f'runs_n{n_tcp}_d{n_dch}.csv')
    write_table(ranking, REPORT_DIR / f'ranking_n{n_tcp}_d{n_dch}.csv')
    return frame, ranking.set_index('policy')


@pytest.fixture(scope='module')
def cells():
    return {cell: _measure(*cell) for cell in CELLS}


def _ranking(cells, n_tcp, n_dch=1):
    return cells[n_tcp, n_dch][1]


@pytest.mark.parametrize('n_tcp', [2, 3])
def test_fsdch_lowest_response_at_low_load(cells, n_tcp):
    table = _ranking(cells, n_tcp).loc[MAIN]
    assert table['mean_response_s'].idxmin() == 'FSDCH', table


@pytest.mark.xfail(reason='FS-DCH gain over FS measured near 1% at N_tcp=2 (see DESIGN.md, trend results)',
                   strict=False)
@pytest.mark.parametrize('n_tcp', [2, 3])
def test_fsdch_gain_over_fs(cells, n_tcp):
    table = _ranking(cells, n_tcp)
    gain = 1 - table.loc['FSDCH', 'mean_response_s'] / table.loc['FS', 'mean_response_s']
    assert gain >= 0.10, table


def test_qs_response_grows_with_high_threshold(cells):
    frame, _ = cells[2, 1]
    aggregates = aggregate_runs(frame)
    qs = aggregates[(aggregates['policy_label'] == 'QS') & (aggregates['value'] >= 12)]
    means = list(qs.sort_values('value')['mean_response_s'])
    assert all(b >= a for a, b in zip(means, means[1:])), means


def test_qs_wins_at_high_load(cells):
    table = _ranking(cells, 5)
    assert table.loc['QS', 'mean_response_s'] <= table.loc['FSDCH', 'mean_response_s'], table


@pytest.mark.parametrize('policy', ['QS', 'FS', 'QSFS'])
def test_policies_beat_fcfs_baseline(cells, policy):
    table = _ranking(cells, 5)
    gain = 1 - table.loc[policy, 'mean_response_s'] / table.loc['MT', 'mean_response_s']
    assert gain >= 0.05, table


@pytest.mark.parametrize('cell', list(CELLS))
def test_best_response_also_best_slowdown(cells, cell):
    table = cells[cell][1]
    assert table['mean_response_s'].idxmin() == table['slowdown_aggregate'].idxmin(), table


def test_second_dch_never_hurts(cells):
    single = _ranking(cells, 5)
    double = _ranking(cells, 5, n_dch=2)
    table = pd.DataFrame({
        'n_dch_1': single['mean_response_s'],
        'n_dch_2': double['mean_response_s'],
    })
    assert (table['n_dch_2'] <= table['n_dch_1']).all(), table
    assert 'FSDCH' in list(double.sort_values('mean_response_s').index[:2]), double
