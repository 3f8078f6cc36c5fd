#!/usr/bin/env python3
"""
Configuration Management System

Provides:
- Run bounds for every bounded search (sampling window, Whitehead depth, ...)
- Configuration validation
- JSON file, .env and KOLCHIN_* environment overrides
- Per-run overrides from kolchin input files and CLI flags
"""

import json
import logging
import os
from dataclasses import dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv


class Environment(Enum):
    """Environment types"""
    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


class OutputFormat(str, Enum):
    json = "json"
    text = "text"


class ConfigValidationError(Exception):
    """Configuration validation error"""
    pass


@dataclass(frozen=True)
class RunConfig:
    """Bounds and options for one computation.

    ``d_max`` of ``None`` means "the rank of the free group", resolved with
    :meth:`for_rank` once the rank is known.
    """
    window: int = 40
    margin: int = 5
    d_max: Optional[int] = None
    whitehead_depth: int = 6
    marking_length_bound: int = 8
    output_format: OutputFormat = OutputFormat.json
    max_bounce_steps: int = 64
    split_m_max: int = 50
    bcc_radius: int = 8
    support_state_cap: int = 5000
    conjugator_search_length: int = 6

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, int):
                continue
            if value <= 0:
                raise ConfigValidationError(f"{f.name} must be positive, got {value}")
        if self.d_max is not None and self.d_max <= 0:
            raise ConfigValidationError(f"d_max must be positive, got {self.d_max}")
        if not isinstance(self.output_format, OutputFormat):
            try:
                object.__setattr__(self, 'output_format', OutputFormat(self.output_format))
            except ValueError:
                raise ConfigValidationError(f"Invalid output format: {self.output_format}")

    def for_rank(self, rank: int) -> 'RunConfig':
        if self.d_max is not None:
            return self
        return replace(self, d_max=rank)

    def with_overrides(self, **overrides: Any) -> 'RunConfig':
        """Return a copy with the non-None overrides applied"""
        clean = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(clean) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigValidationError(f"Unknown run options: {sorted(unknown)}")
        return replace(self, **clean)


@dataclass
class LoggingConfig:
    """Logging configuration"""
    level: str = "WARNING"
    json_logs: bool = False
    log_file: Optional[str] = None

    def __post_init__(self):
        valid_log_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if self.level.upper() not in valid_log_levels:
            raise ConfigValidationError(f"Invalid log level: {self.level}")


@dataclass
class AppConfig:
    """Main application configuration"""
    environment: Environment
    run: RunConfig
    logging: LoggingConfig


_INT_ENV_VARS = {
    'KOLCHIN_WINDOW': 'window',
    'KOLCHIN_MARGIN': 'margin',
    'KOLCHIN_D_MAX': 'd_max',
    'KOLCHIN_WHITEHEAD_DEPTH': 'whitehead_depth',
    'KOLCHIN_MARKING_LENGTH_BOUND': 'marking_length_bound',
    'KOLCHIN_MAX_BOUNCE_STEPS': 'max_bounce_steps',
    'KOLCHIN_SPLIT_M_MAX': 'split_m_max',
    'KOLCHIN_BCC_RADIUS': 'bcc_radius',
    'KOLCHIN_SUPPORT_STATE_CAP': 'support_state_cap',
    'KOLCHIN_CONJUGATOR_SEARCH_LENGTH': 'conjugator_search_length',
}


class ConfigManager:
    """Configuration manager with validation and environment support"""

    def __init__(self, config_file: Optional[str] = None, env_file: Optional[str] = '.env'):
        self.config_file = config_file
        self.env_file = env_file
        self.config: Optional[AppConfig] = None
        self.logger = logging.getLogger(__name__)

    def load_config(self, environment: Optional[str] = None) -> AppConfig:
        """Load and validate configuration"""
        if self.env_file and Path(self.env_file).exists():
            load_dotenv(self.env_file)

        env = Environment(environment or os.getenv('KOLCHIN_ENV', 'development'))

        config_data = self._load_config_data()
        config_data = self._override_with_env_vars(config_data)
        self.config = self._create_config_objects(config_data, env)
        self._validate_config()

        self.logger.info(f"Configuration loaded for environment: {env.value}")
        return self.config

    def _load_config_data(self) -> Dict[str, Any]:
        """Load configuration data from the JSON config file"""
        config_data: Dict[str, Any] = {}
        if self.config_file:
            path = Path(self.config_file)
            if not path.exists():
                raise ConfigValidationError(f"Config file not found: {self.config_file}")
            with open(path, 'r') as f:
                try:
                    config_data = json.load(f)
                except json.JSONDecodeError as e:
                    raise ConfigValidationError(f"Invalid JSON in {self.config_file}: {e}")
        return config_data

    def _override_with_env_vars(self, config_data: Dict[str, Any]) -> Dict[str, Any]:
        """Override configuration with environment variables"""
        run_config = config_data.setdefault('run', {})
        for var, key in _INT_ENV_VARS.items():
            if os.getenv(var):
                try:
                    run_config[key] = int(os.getenv(var))
                except ValueError:
                    raise ConfigValidationError(f"{var} must be an integer")
        if os.getenv('KOLCHIN_FORMAT'):
            run_config['output_format'] = os.getenv('KOLCHIN_FORMAT')

        logging_config = config_data.setdefault('logging', {})
        if os.getenv('KOLCHIN_LOG_LEVEL'):
            logging_config['level'] = os.getenv('KOLCHIN_LOG_LEVEL')
        if os.getenv('KOLCHIN_JSON_LOGS'):
            logging_config['json_logs'] = os.getenv('KOLCHIN_JSON_LOGS').lower() == 'true'
        if os.getenv('KOLCHIN_LOG_FILE'):
            logging_config['log_file'] = os.getenv('KOLCHIN_LOG_FILE')

        return config_data

    def _create_config_objects(self, config_data: Dict[str, Any], env: Environment) -> AppConfig:
        """Create configuration objects from data"""
        run_data = dict(config_data.get('run', {}))
        if 'format' in run_data:
            run_data['output_format'] = run_data.pop('format')
        try:
            run_config = RunConfig(**run_data)
            logging_config = LoggingConfig(**config_data.get('logging', {}))
        except TypeError as e:
            raise ConfigValidationError(f"Unknown configuration key: {e}")

        return AppConfig(environment=env, run=run_config, logging=logging_config)

    def _validate_config(self):
        """Validate configuration for consistency"""
        if not self.config:
            raise ConfigValidationError("Configuration not loaded")

        run = self.config.run
        if run.window < run.margin + 2:
            raise ConfigValidationError("window must exceed margin + 1")
        if run.d_max is not None and run.window < run.d_max + run.margin + 2:
            raise ConfigValidationError("window must be at least d_max + margin + 2")

        if self.config.environment == Environment.PRODUCTION and self.config.logging.level.upper() == 'DEBUG':
            self.logger.warning("Debug logging enabled in production")

    def get_config(self) -> AppConfig:
        """Get current configuration, loading defaults on first use"""
        if not self.config:
            return self.load_config()
        return self.config

    def export_config(self) -> Dict[str, Any]:
        """Export configuration as dictionary"""
        if not self.config:
            raise ConfigValidationError("Configuration not loaded")

        def dataclass_to_dict(obj):
            if hasattr(obj, '__dataclass_fields__'):
                result = {}
                for field_name in obj.__dataclass_fields__:
                    field_value = getattr(obj, field_name)
                    if hasattr(field_value, '__dataclass_fields__'):
                        result[field_name] = dataclass_to_dict(field_value)
                    elif isinstance(field_value, Enum):
                        result[field_name] = field_value.value
                    else:
                        result[field_name] = field_value
                return result
            return obj

        return dataclass_to_dict(self.config)


# Global configuration manager
config_manager = ConfigManager()


def get_config() -> AppConfig:
    """Get the global configuration"""
    return config_manager.get_config()
