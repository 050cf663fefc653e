# Kết nối và cấu hình database lưu kết quả run
from flask_sqlalchemy import SQLAlchemy
from sqlalchemy import text

from utils.logger import logger

# Khởi tạo SQLAlchemy instance
db = SQLAlchemy()


def init_db():
    """Tạo các bảng (gọi trong app context)"""
    from flask import current_app

    # import để model được đăng ký với metadata
    from models.RunRecord import RunRecord  # noqa: F401

    try:
        logger.debug(f"Database URI: {current_app.config['SQLALCHEMY_DATABASE_URI']}")
        db.create_all()
        logger.info("Database tables ready")
    except Exception as e:
        logger.error(f"Error initializing database: {str(e)}")
        raise


def check_database_health():
    """Check database health"""
    from models.RunRecord import RunRecord

    try:
        with db.engine.connect() as conn:
            conn.execute(text("SELECT 1"))
        return {
            'status': 'healthy',
            'connection': 'ok',
            'run_count': db.session.query(RunRecord).count(),
        }
    except Exception as e:
        logger.error(f"Database health check failed: {str(e)}")
        return {
            'status': 'unhealthy',
            'connection': 'failed',
            'error': str(e)
        }
