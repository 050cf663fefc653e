# Xử lý lỗi tập trung cho API
import traceback

from flask import request
from sqlalchemy.exc import SQLAlchemyError

from utils.errors import SimulationError, ValidationError
from utils.logger import logger
from utils.response_wrapper import ResponseWrapper


def register_error_handlers(app):
    """Đăng ký các error handler cho Flask app"""

    @app.errorhandler(ValidationError)
    def validation_error_handler(error):
        logger.warning(f"Validation Error: {request.method} {request.path} - {error.message}")
        return ResponseWrapper().error(
            message=error.message,
            error={'field': error.field},
            error_code=error.error_code,
            status_code=error.status_code
        )

    @app.errorhandler(SimulationError)
    def simulation_error_handler(error):
        """EmptyRecordSetError, ResourceNotFoundError, InvariantViolation, ..."""
        log = logger.warning if error.status_code < 500 else logger.error
        log(f"{type(error).__name__}: {request.method} {request.path} - {error.message}")
        return ResponseWrapper().error(
            message=error.message,
            error_code=error.error_code,
            status_code=error.status_code
        )

    @app.errorhandler(404)
    def not_found_error(error):
        logger.warning(f"Not Found: {request.method} {request.path}")
        return ResponseWrapper().error(
            message="Resource not found",
            error=f"Endpoint {request.path} does not exist",
            status_code=404
        )

    @app.errorhandler(405)
    def method_not_allowed_error(error):
        logger.warning(f"Method Not Allowed: {request.method} {request.path}")
        return ResponseWrapper().error(
            message="Method not allowed",
            error=f"{request.method} is not supported on this endpoint",
            status_code=405
        )

    @app.errorhandler(SQLAlchemyError)
    def database_error(error):
        logger.error(f"Database Error: {request.method} {request.path} - {str(error)}")
        return ResponseWrapper().error(
            message="Database error",
            error="Could not access the results database",
            status_code=500
        )

    @app.errorhandler(Exception)
    def general_exception_handler(error):
        """Xử lý tất cả các exception chưa được catch"""
        logger.error(f"Unhandled Exception: {request.method} {request.path} - {type(error).__name__}: {error}")
        logger.error(f"Traceback: {traceback.format_exc()}")
        detail = f"{type(error).__name__}: {error}" if app.config.get('DEBUG', False) else None
        return ResponseWrapper().error(
            message="Internal server error",
            error=detail,
            status_code=500
        )
