# Lưu và truy vấn RunSummary trong database kết quả
import pandas as pd

from config.db import db
from models.RunRecord import RunRecord
from services.metrics_service import CSV_COLUMNS
from utils.errors import ResourceNotFoundError
from utils.logger import log_function_call, logger


class ResultsService:
    """Các thao tác trên bảng runs; cần Flask app context"""

    def store(self, summaries, label=None):
        records = [RunRecord.from_summary(s, label=label) for s in summaries]
        try:
            db.session.add_all(records)
            db.session.commit()
        except Exception:
            db.session.rollback()
            raise
        logger.info(f"Stored {len(records)} run(s) in the results database")
        return records

    def get(self, run_id) -> RunRecord:
        record = RunRecord.find_by_id(run_id)
        if record is None:
            raise ResourceNotFoundError(f"run {run_id} not found")
        return record

    def list(self, policy=None, n_tcp=None, n_dch=None, limit=None):
        return RunRecord.find_filtered(policy=policy, n_tcp=n_tcp, n_dch=n_dch, limit=limit)

    def aggregate(self, records):
        """Mean/sem của response time và slowdown theo (policy, scheduler, n_tcp, n_dch)"""
        if not records:
            return []
        frame = pd.DataFrame([r.to_summary().to_row() for r in records], columns=list(CSV_COLUMNS))
        grouped = frame.groupby(['policy', 'scheduler', 'n_tcp', 'n_dch'])
        table = grouped.agg(
            runs=('seed', 'size'),
            mean_response_s=('mean_response_s', 'mean'),
            mean_response_s_sem=('mean_response_s', 'sem'),
            slowdown_aggregate=('slowdown_aggregate', 'mean'),
        ).reset_index()
        # NaN (một run) -> None cho JSON
        return table.astype(object).where(table.notna(), None).to_dict(orient='records')


results_service = ResultsService()


@log_function_call("store_summaries")
def store_summaries(database_url, summaries, label=None):
    """Lưu summaries từ CLI (--store) vào database tại `database_url`"""
    from app import create_app

    app = create_app(database_url=database_url)
    with app.app_context():
        return len(results_service.store(summaries, label=label))
