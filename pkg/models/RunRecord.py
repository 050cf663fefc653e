# Mô hình dữ liệu RunRecord: một RunSummary đã lưu
from datetime import datetime

from sqlalchemy import Column, DateTime, Float, Integer, String

from config.db import db
from services.metrics_service import CSV_COLUMNS, RunSummary


class RunRecord(db.Model):
    """Model cho bảng runs"""
    __tablename__ = 'runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    label = Column(String(200), nullable=True)
    policy = Column(String(16), nullable=False, index=True)
    scheduler = Column(String(8), nullable=False)
    n_tcp = Column(Integer, nullable=False, index=True)
    n_dch = Column(Integer, nullable=False, index=True)
    s = Column(Integer, nullable=False)
    t_h = Column(Integer, nullable=False)
    t_l = Column(Integer, nullable=False)
    t_out = Column(Float, nullable=False)
    seed = Column(Integer, nullable=False)
    duration_s = Column(Float, nullable=False)
    n_bursts = Column(Integer, nullable=False)
    mean_response_s = Column(Float, nullable=False)
    slowdown_aggregate = Column(Float, nullable=False)
    slowdown_per_burst = Column(Float, nullable=False)
    util_fach = Column(Float, nullable=False)
    util_dch = Column(Float, nullable=False)
    switches_per_flow = Column(Float, nullable=False)
    created_at = Column(DateTime, default=datetime.utcnow)

    def __repr__(self):
        return f'<RunRecord {self.id} {self.policy}/{self.scheduler} n_tcp={self.n_tcp} seed={self.seed}>'

    @classmethod
    def from_summary(cls, summary: RunSummary, label=None):
        return cls(label=label, **summary.to_row())

    def to_summary(self) -> RunSummary:
        return RunSummary.from_row({name: getattr(self, name) for name in CSV_COLUMNS})

    def to_dict(self):
        """Chuyển đổi object thành dictionary"""
        data = {'id': self.id, 'label': self.label}
        data.update({name: getattr(self, name) for name in CSV_COLUMNS})
        data['created_at'] = self.created_at.isoformat() if self.created_at else None
        return data

    @classmethod
    def find_by_id(cls, run_id):
        return db.session.get(cls, run_id)

    @classmethod
    def find_filtered(cls, policy=None, n_tcp=None, n_dch=None, limit=None):
        """Lọc theo policy / N_tcp / N_dch, mới nhất trước"""
        query = db.select(cls)
        if policy:
            query = query.filter_by(policy=policy)
        if n_tcp is not None:
            query = query.filter_by(n_tcp=n_tcp)
        if n_dch is not None:
            query = query.filter_by(n_dch=n_dch)
        query = query.order_by(cls.id.desc())
        if limit:
            query = query.limit(limit)
        return list(db.session.scalars(query))

