# Khởi chạy API server
import os

from app import create_app
from config.env import get_config, validate_config
from utils.logger import logger


def serve(host=None, port=None, database_url=None):
    cfg = get_config()
    validate_config(cfg)
    app = create_app(cfg, database_url=database_url)
    host = host or cfg.HOST
    port = port or cfg.PORT
    logger.info(f"Server starting at http://{host}:{port}")
    logger.info(f"Environment: {os.environ.get('APP_ENV', 'development')}")
    logger.info(f"API Base URL: http://{host}:{port}/api/runs")
    app.run(host=host, port=port, debug=cfg.DEBUG, use_reloader=False)


if __name__ == '__main__':
    serve()
