# API kết quả simulation
from flask import Blueprint

from controllers.run_controller import RunController

# Tạo blueprint
runs_bp = Blueprint('runs', __name__)

# Khởi tạo controller
run_controller = RunController()


# GET /api/runs - Danh sách run đã lưu (+ aggregate)
@runs_bp.route('/', methods=['GET'])
def list_runs():
    return run_controller.list_runs()


# GET /api/runs/<id> - Một run
@runs_bp.route('/<int:run_id>', methods=['GET'])
def get_run(run_id):
    return run_controller.get_run(run_id)


# POST /api/runs - Chạy scenario (JSON overrides) và lưu kết quả
@runs_bp.route('/', methods=['POST'])
def create_run():
    return run_controller.create_run()


# GET /api/runs/calc?n=10&bytes=1000 - Transfer time theo công thức đóng
@runs_bp.route('/calc', methods=['GET'])
def calc():
    return run_controller.calc()
