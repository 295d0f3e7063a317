from .app import ModelRegistry, create_app
