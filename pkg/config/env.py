# Cấu hình môi trường: database kết quả, logging, worker pool
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Base configuration class"""

    # Flask configuration
    SECRET_KEY = os.environ.get('SECRET_KEY') or 'dev-secret-key-change-in-production'
    JSON_SORT_KEYS = False

    # Database lưu RunSummary
    SQLALCHEMY_DATABASE_URI = os.environ.get('DATABASE_URL', 'sqlite:///./runs.db')
    SQLALCHEMY_TRACK_MODIFICATIONS = False

    # Server configuration
    HOST = os.environ.get('HOST', '0.0.0.0')
    PORT = int(os.environ.get('PORT', 5000))
    DEBUG = os.environ.get('FLASK_DEBUG', 'False').lower() == 'true'

    # Logging configuration
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO').upper()
    LOG_TO_FILE = os.environ.get('LOG_TO_FILE', 'False').lower() == 'true'

    # Simulation runner
    SIM_WORKERS = int(os.environ.get('SIM_WORKERS', 1))
    # run qua API bị giới hạn để request không treo quá lâu
    API_MAX_DURATION = float(os.environ.get('API_MAX_DURATION', 2000))


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True
    TESTING = False
    LOG_LEVEL = 'DEBUG'


class ProductionConfig(Config):
    """Production configuration"""
    DEBUG = False
    TESTING = False
    LOG_TO_FILE = True


class TestingConfig(Config):
    """Testing configuration"""
    DEBUG = True
    TESTING = True

    # Use in-memory database for testing
    SQLALCHEMY_DATABASE_URI = 'sqlite:///:memory:'
    API_MAX_DURATION = 500.0


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(env=None):
    """Get configuration based on environment"""
    env = env or os.environ.get('APP_ENV', 'development')
    return config.get(env, config['default'])


def validate_config(cfg=None):
    """Validate required configuration"""
    cfg = cfg or get_config()
    problems = []
    if not cfg.SQLALCHEMY_DATABASE_URI:
        problems.append('DATABASE_URL')
    if cfg.SIM_WORKERS < 1:
        problems.append('SIM_WORKERS')
    if not cfg.API_MAX_DURATION > 0:
        problems.append('API_MAX_DURATION')
    if problems:
        raise ValueError(f"Invalid environment variables: {', '.join(problems)}")
    return True

