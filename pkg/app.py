# File chính khởi tạo app
from flask import Flask, jsonify

# Import config
from config.env import get_config
from config.db import db, init_db, check_database_health

# Import routes
from routes.runs import runs_bp

# Import middlewares
from middlewares.error_handler import register_error_handlers


def create_app(config_class=None, database_url=None):
    """Tạo và cấu hình Flask app"""
    app = Flask(__name__)

    # Load configuration
    app.config.from_object(config_class or get_config())
    if database_url:
        app.config['SQLALCHEMY_DATABASE_URI'] = database_url

    # Initialize extensions
    db.init_app(app)

    # Initialize database
    with app.app_context():
        init_db()

    # Register blueprints (routes)
    app.register_blueprint(runs_bp, url_prefix='/api/runs')

    # Health check endpoint
    @app.route('/')
    def health_check():
        return jsonify({
            'message': 'Channel switching simulator API is running',
            'status': 'OK',
            'database': check_database_health()['status'],
        })

    # Register error handlers
    register_error_handlers(app)

    return app
