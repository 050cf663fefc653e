# Logger dùng chung cho simulator, experiment runner và API
import logging
import os
from datetime import datetime
from functools import wraps
from logging.handlers import RotatingFileHandler


class Logger:
    """Custom logger cho ứng dụng"""

    def __init__(self, name='channel_switch_sim'):
        self.logger = logging.getLogger(name)
        self.setup_logger()

    def setup_logger(self):
        """Thiết lập cấu hình logger"""

        # Nếu logger đã được setup thì không setup lại
        if self.logger.handlers:
            return

        log_level = os.getenv('LOG_LEVEL', 'INFO').upper()
        self.logger.setLevel(getattr(logging, log_level, logging.INFO))

        formatter = logging.Formatter(
            fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        # Console handler (stderr, để stdout chỉ chứa CSV)
        console_handler = logging.StreamHandler()
        console_handler.setLevel(getattr(logging, log_level, logging.INFO))
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if os.getenv('LOG_TO_FILE', 'False').lower() == 'true':
            self.setup_file_handler(formatter)

        # Ngăn log duplicate
        self.logger.propagate = False

    def setup_file_handler(self, formatter):
        """Thiết lập file handler cho logging"""
        try:
            log_dir = os.getenv('LOG_DIR', 'logs')
            os.makedirs(log_dir, exist_ok=True)

            file_handler = RotatingFileHandler(
                os.path.join(log_dir, 'sim.log'),
                maxBytes=10*1024*1024,  # 10MB
                backupCount=5
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

            error_handler = RotatingFileHandler(
                os.path.join(log_dir, 'error.log'),
                maxBytes=10*1024*1024,
                backupCount=5
            )
            error_handler.setLevel(logging.ERROR)
            error_handler.setFormatter(formatter)
            self.logger.addHandler(error_handler)

        except OSError as e:
            self.logger.warning(f"Could not setup file logging: {str(e)}")

    def is_debug(self):
        return self.logger.isEnabledFor(logging.DEBUG)

    def info(self, message):
        self.logger.info(message)

    def debug(self, message):
        self.logger.debug(message)

    def warning(self, message):
        self.logger.warning(message)

    def error(self, message):
        self.logger.error(message)

    def critical(self, message):
        self.logger.critical(message)

    def log_error_with_context(self, error, context=None):
        """Log error với context"""
        context_info = f" - Context: {context}" if context else ""
        self.error(f"Error: {type(error).__name__}: {str(error)}{context_info}")

    def log_performance_warning(self, operation, duration_ms, threshold_ms=60000):
        """Log performance warning khi operation chậm"""
        if duration_ms > threshold_ms:
            self.warning(f"Performance Warning: {operation} took {duration_ms:.2f}ms (threshold: {threshold_ms}ms)")


class SimulationLogger:
    """Logger cho một lần chạy simulation"""

    def __init__(self):
        self.logger = Logger('simulation')

    def log_run_start(self, label, seed, duration):
        self.logger.info(f"Run Started: {label} - Seed: {seed} - Duration: {duration:g}s")

    def log_run_complete(self, label, events, bursts, wall_ms, trace_digest=None):
        digest_info = f" - Trace: {trace_digest[:16]}" if trace_digest else ""
        self.logger.info(
            f"Run Completed: {label} - Events: {events} - Bursts: {bursts} - "
            f"Duration: {wall_ms:.2f}ms{digest_info}"
        )
        self.logger.log_performance_warning(f"run {label}", wall_ms)

    def log_switch(self, now, conn, source, target, reason):
        """Switch decisions chỉ log ở mức DEBUG (rất nhiều)"""
        if self.logger.is_debug():
            self.logger.debug(f"Switch: t={now:.6f} conn={conn} {source}->{target} ({reason})")

    def log_spurious_ack(self, conn, seq):
        self.logger.warning(f"Spurious ACK ignored: conn={conn} seq={seq}")

    def log_invariant_violation(self, name, now, details):
        self.logger.error(f"Invariant Violation: {name} at t={now:.6f} - {details}")


class ExperimentLogger:
    """Logger cho sweep / compare"""

    def __init__(self):
        self.logger = Logger('experiment')

    def log_sweep_start(self, parameter, runs, workers):
        self.logger.info(f"Sweep Started: parameter={parameter} - Runs: {runs} - Workers: {workers}")

    def log_run_done(self, index, total, label, mean_response):
        self.logger.info(f"[{index}/{total}] {label} - mean response {mean_response:.4f}s")

    def log_sweep_complete(self, runs, duration_ms):
        self.logger.info(f"Sweep Completed: {runs} runs in {duration_ms:.2f}ms")

    def log_single_seed(self):
        self.logger.warning("Only one seed given: standard error columns left empty")

    def log_best(self, n_tcp, n_dch, policy, gain):
        self.logger.info(f"Best policy at N_tcp={n_tcp}, N_dch={n_dch}: {policy} (gain {gain:.1%})")


# Tạo các instance logger global
logger = Logger()
sim_logger = SimulationLogger()
experiment_logger = ExperimentLogger()


def log_function_call(func_name):
    """Decorator để log function calls"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = datetime.now()
            logger.debug(f"Function Call: {func_name} started")
            try:
                result = func(*args, **kwargs)
                duration = (datetime.now() - start_time).total_seconds() * 1000
                logger.debug(f"Function Call: {func_name} completed in {duration:.2f}ms")
                return result
            except Exception as e:
                duration = (datetime.now() - start_time).total_seconds() * 1000
                logger.error(f"Function Call: {func_name} failed after {duration:.2f}ms - Error: {str(e)}")
                raise
        return wrapper
    return decorator
