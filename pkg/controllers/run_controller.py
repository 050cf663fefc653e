# Xử lý logic cho API runs: chạy scenario, liệt kê/tra cứu kết quả, calculator
from flask import current_app, request

from config.scenario import load_scenario
from services.experiment_service import run_scenario
from services.metrics_service import transfer_time_table
from services.results_service import results_service
from utils.errors import ValidationError
from utils.logger import logger
from utils.response_wrapper import ResponseWrapper


class RunController:
    def __init__(self):
        self.response = ResponseWrapper()

    def list_runs(self):
        """Danh sách run, lọc theo policy / n_tcp / n_dch"""
        records = results_service.list(
            policy=request.args.get('policy', type=str),
            n_tcp=request.args.get('n_tcp', type=int),
            n_dch=request.args.get('n_dch', type=int),
            limit=request.args.get('limit', type=int),
        )
        return self.response.success(
            data={
                'items': [r.to_dict() for r in records],
                'aggregates': results_service.aggregate(records),
            },
            message=f"{len(records)} run(s)",
            meta={'count': len(records)}
        )

    def get_run(self, run_id):
        return self.response.success(data=results_service.get(run_id).to_dict())

    def create_run(self):
        """Chạy một scenario từ JSON overrides và lưu kết quả"""
        payload = request.get_json(silent=True)
        if payload is None:
            payload = {}
        if not isinstance(payload, dict):
            raise ValidationError("request body must be a JSON object", field='body')

        config = load_scenario(overrides=payload)
        max_duration = current_app.config['API_MAX_DURATION']
        if config.duration > max_duration:
            raise ValidationError(f"must be <= {max_duration:g}s for API runs", field='duration')

        logger.info(f"API run requested: {config.label()}")
        summary = run_scenario(config)
        record = results_service.store([summary], label=config.label())[0]
        return self.response.created(data=record.to_dict(), message="Run completed")

    def calc(self):
        n_packets = request.args.get('n', type=int)
        packet_bytes = request.args.get('bytes', type=float)
        if n_packets is None:
            raise ValidationError("query parameter is required", field='n')
        if packet_bytes is None:
            raise ValidationError("query parameter is required", field='bytes')
        return self.response.success(data=transfer_time_table(n_packets, packet_bytes))
