# Chạy run / sweep / compare, gom kết quả thành bảng pandas và ghi CSV
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from config.scenario import ScenarioConfig, SweepSpec
from services.metrics_service import CSV_COLUMNS, RunSummary, transfer_time_table
from services.policy_service import PolicyKind
from services.radio_service import Discipline
from services.simulation_service import run_simulation
from utils.errors import ValidationError
from utils.logger import experiment_logger

FLOAT_FORMAT = '%.6g'

GROUP_KEYS = ['policy', 'scheduler', 'n_tcp', 'n_dch']

AGGREGATED = ['mean_response_s', 'slowdown_aggregate', 'slowdown_per_burst',
              'util_fach', 'util_dch', 'switches_per_flow']


@dataclass(frozen=True)
class PolicyVariant:
    """Policy kind + FACH discipline, viết dạng KIND[+ps|+las]"""

    kind: PolicyKind
    scheduler: Discipline | None = None

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        if isinstance(text, PolicyKind):
            return cls(text)
        kind, _, scheduler = str(text).partition('+')
        if not scheduler:
            return cls(PolicyKind.parse(kind))
        try:
            return cls(PolicyKind.parse(kind), Discipline(scheduler.strip().upper()))
        except ValueError:
            raise ValidationError(f"unknown scheduler in '{text}'", field='policy') from None

    @property
    def label(self):
        if self.scheduler is None:
            return self.kind.value
        return f"{self.kind.value}+{self.scheduler.value}"

    def apply(self, config: ScenarioConfig) -> ScenarioConfig:
        overrides = {'policy': self.kind}
        if self.scheduler is not None:
            overrides['scheduler'] = self.scheduler
        return config.with_overrides(**overrides)


def swept_parameter(kind: PolicyKind):
    """Threshold mà policy thực sự dùng: T_h cho QS/MT/QSFS, s cho FS/FS-DCH"""
    return 's' if kind in (PolicyKind.FS, PolicyKind.FSDCH) else 't_h'


@dataclass(frozen=True)
class RunPlan:
    policy: str
    parameter: str
    value: int
    seed: int
    config: ScenarioConfig


def plan_sweep(spec: SweepSpec, base: ScenarioConfig):
    """Cartesian product (policy × value × seed) theo đúng thứ tự output"""
    spec.validate()
    plans = []
    for variant in (PolicyVariant.parse(p) for p in spec.policies):
        parameter = spec.parameter or swept_parameter(variant.kind)
        for value in spec.values:
            for seed in spec.seeds:
                config = variant.apply(base).with_overrides(**{parameter: int(value), 'seed': int(seed)})
                plans.append(RunPlan(variant.label, parameter, int(value), int(seed), config.validate()))
    return plans


def run_scenario(config: ScenarioConfig, trace_path=None, audit=False) -> RunSummary:
    summary, _ = run_simulation(config, trace_path=trace_path, audit=audit)
    return summary


def execute_plans(plans, workers=1):
    """Chạy các run (song song nếu workers > 1); kết quả giữ thứ tự của plans"""
    configs = [plan.config for plan in plans]
    total = len(configs)
    experiment_logger.log_sweep_start(plans[0].parameter if plans else '-', total, workers)
    started = time.perf_counter()
    if workers > 1 and total > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(run_scenario, configs))
        for index, (plan, summary) in enumerate(zip(plans, summaries), start=1):
            experiment_logger.log_run_done(index, total, plan.config.label(), summary.mean_response_s)
    else:
        summaries = []
        for index, config in enumerate(configs, start=1):
            summary = run_scenario(config)
            summaries.append(summary)
            experiment_logger.log_run_done(index, total, config.label(), summary.mean_response_s)
    experiment_logger.log_sweep_complete(total, (time.perf_counter() - started) * 1000)
    return summaries


def summaries_frame(summaries, plans=None) -> pd.DataFrame:
    """Một dòng mỗi run, đúng thứ tự cột CSV"""
    frame = pd.DataFrame([s.to_row() for s in summaries], columns=list(CSV_COLUMNS))
    if plans is not None:
        frame['policy_label'] = [p.policy for p in plans]
        frame['parameter'] = [p.parameter for p in plans]
        frame['value'] = [p.value for p in plans]
    return frame


def aggregate_runs(frame: pd.DataFrame) -> pd.DataFrame:
    """Mean và standard error qua các seed cho mỗi (policy, value)"""
    keys = ['policy_label', 'parameter', 'value', 'n_tcp', 'n_dch']
    grouped = frame.groupby(keys, sort=False)[AGGREGATED]
    means = grouped.mean()
    sems = grouped.sem(ddof=1).add_suffix('_sem')
    counts = grouped.size().rename('seeds')
    table = pd.concat([counts, means, sems], axis=1).reset_index()
    if (table['seeds'] < 2).any():
        experiment_logger.log_single_seed()
    return table


def sweep(spec: SweepSpec, base: ScenarioConfig, workers=1):
    """Trả về (bảng từng run, bảng aggregate)"""
    plans = plan_sweep(spec, base)
    frame = summaries_frame(execute_plans(plans, workers), plans)
    return frame, aggregate_runs(frame)


def rank_policies(aggregates: pd.DataFrame) -> pd.DataFrame:
    """Best-over-own-sweep cho mỗi policy và gain của policy tốt nhất so với từng policy.

    gain = (T_other - T_best) / T_other.
    """
    rows = []
    for label, group in aggregates.groupby('policy_label', sort=False):
        best = group.loc[group['mean_response_s'].idxmin()]
        rows.append({
            'policy': label,
            'parameter': best['parameter'],
            'best_value': int(best['value']),
            'mean_response_s': best['mean_response_s'],
            'mean_response_s_sem': best['mean_response_s_sem'],
            'slowdown_aggregate': best['slowdown_aggregate'],
            'slowdown_aggregate_sem': best['slowdown_aggregate_sem'],
            'seeds': int(best['seeds']),
        })
    ranking = pd.DataFrame(rows).sort_values(['mean_response_s', 'policy'], kind='mergesort')
    t_best = ranking['mean_response_s'].iloc[0]
    ranking['gain_of_best'] = (ranking['mean_response_s'] - t_best) / ranking['mean_response_s']
    ranking.insert(0, 'rank', np.arange(1, len(ranking) + 1))
    return ranking.reset_index(drop=True)


def compare(policies, base: ScenarioConfig, seeds, values, workers=1):
    """Xếp hạng các policy, mỗi policy lấy giá trị tốt nhất trên sweep threshold của nó"""
    if len(policies) < 2:
        raise ValidationError("compare needs at least two policies", field='policies')
    spec = SweepSpec(None, list(values), list(policies), list(seeds))
    frame, aggregates = sweep(spec, base, workers)
    ranking = rank_policies(aggregates)
    ranking.insert(1, 'n_tcp', base.n_tcp)
    ranking.insert(2, 'n_dch', base.n_dch)
    return frame, ranking


def compare_matrix(policies, base: ScenarioConfig, seeds, values, n_tcp_values, n_dch_values, workers=1):
    """compare cho mọi cell (N_tcp, N_dch); trả về (rankings ghép, bảng best-policy)"""
    rankings = []
    best_rows = []
    for n_dch in n_dch_values:
        for n_tcp in n_tcp_values:
            cell = base.with_overrides(n_tcp=int(n_tcp), n_dch=int(n_dch)).validate()
            _, ranking = compare(policies, cell, seeds, values, workers)
            rankings.append(ranking)
            best = ranking.iloc[0]
            others = ranking['mean_response_s'].iloc[1:]
            gain_vs_mean = (others.mean() - best['mean_response_s']) / others.mean()
            gain_vs_next = ranking['gain_of_best'].iloc[1]
            experiment_logger.log_best(n_tcp, n_dch, best['policy'], gain_vs_next)
            best_rows.append({
                'n_tcp': int(n_tcp),
                'n_dch': int(n_dch),
                'best_policy': best['policy'],
                'mean_response_s': best['mean_response_s'],
                'runner_up': ranking['policy'].iloc[1],
                'gain_vs_runner_up': gain_vs_next,
                'gain_vs_mean_of_others': gain_vs_mean,
            })
    return pd.concat(rankings, ignore_index=True), pd.DataFrame(best_rows)


def calc_table(n_packets, packet_bytes, **rates) -> pd.DataFrame:
    table = transfer_time_table(n_packets, packet_bytes, **rates)
    return pd.DataFrame([{'n_packets': n_packets, 'packet_bytes': packet_bytes, **table}])


def write_table(frame: pd.DataFrame, target):
    """Ghi CSV với 6 chữ số có nghĩa (deterministic); target là path hoặc file object"""
    frame.to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
