# Các exception dùng chung (CLI exit code + HTTP status code)


class SimulationError(Exception):
    """Base exception cho simulator"""

    exit_code = 2
    status_code = 500
    error_code = 'SIMULATION_ERROR'

    def __init__(self, message, error_code=None):
        super().__init__(message)
        self.message = message
        if error_code:
            self.error_code = error_code


class ValidationError(SimulationError):
    """Config hoặc tham số không hợp lệ"""

    exit_code = 1
    status_code = 400
    error_code = 'VALIDATION_ERROR'

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class SchedulingError(SimulationError):
    """Event được schedule vào quá khứ (lỗi logic)"""

    error_code = 'SCHEDULING_ERROR'


class ChannelBusyError(SimulationError):
    """Transmit trên channel đang bận"""

    error_code = 'CHANNEL_BUSY'


class SwitchInProgressError(SimulationError):
    """Connection đang switch mà lại bắt đầu switch khác"""

    error_code = 'SWITCH_IN_PROGRESS'


class DuplicateRecordError(SimulationError):
    error_code = 'DUPLICATE_RECORD'


class EmptyRecordSetError(SimulationError):
    """Không có burst nào sau warmup để tính summary"""

    status_code = 422
    error_code = 'EMPTY_RECORD_SET'


class InvariantViolation(SimulationError):
    error_code = 'INVARIANT_VIOLATION'

    def __init__(self, name, now, details):
        super().__init__(f"{name} violated at t={now:.6f}: {details}")
        self.name = name
        self.now = now


class ResourceNotFoundError(SimulationError):
    status_code = 404
    error_code = 'NOT_FOUND'


def exit_code_for(error):
    """Map exception -> CLI exit code (0 ok, 1 validation, 2 runtime)"""
    if isinstance(error, SimulationError):
        return error.exit_code
    return 2
