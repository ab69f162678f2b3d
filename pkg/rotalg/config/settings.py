import yaml
import os
import logging
from dotenv import load_dotenv

load_dotenv()

# 项目根目录（以当前文件为基准）
_PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..'))

# 数值默认值：配置文件缺省时使用
_COMPUTE_DEFAULTS = {
    'threads': None,
    'grid': [64, 64],
    'refine': 3,
    'refine_candidates': 4,
    'section_resolution_factor': 8,
}

_TOLERANCE_DEFAULTS = {
    'cluster': 1e-9,
    'membership': 1e-8,
    'fourier_prune': 1e-12,
    'cli': 1e-9,
}

_SYSTEM_DEFAULTS = {
    'output_dir': './output',
    'log_dir': './logs',
    'log_level': 'INFO',
}


def _env_int(name: str):
    val = os.environ.get(name)
    if val is None or not str(val).strip():
        return None
    try:
        return int(str(val).strip())
    except ValueError:
        logging.warning(f"环境变量 {name}={val!r} 不是整数，已忽略")
        return None


class Config:
    _config_cache = None

    @classmethod
    def get_config(cls):
        if cls._config_cache is None:
            try:
                cls._config_cache = cls.load_config()
            except Exception:
                cls._config_cache = {}
        return cls._config_cache

    @staticmethod
    def project_root() -> str:
        return _PROJECT_ROOT

    @staticmethod
    def resolve_path(path: str) -> str:
        if not path:
            return path
        return path if os.path.isabs(path) else os.path.abspath(os.path.join(_PROJECT_ROOT, path))

    @staticmethod
    def load_config():
        config_paths = [
            os.path.join(_PROJECT_ROOT, 'config', 'config.yaml'),
            os.path.join(_PROJECT_ROOT, 'config.yaml'),
        ]
        for config_path in config_paths:
            if os.path.exists(config_path):
                with open(config_path, 'r', encoding='utf-8') as f:
                    return yaml.safe_load(f) or {}
        raise FileNotFoundError('未找到配置文件 config.yaml，请将配置文件放在项目根目录或 config/ 目录下')

    @classmethod
    def get_section(cls, name: str) -> dict:
        try:
            config = cls.get_config() or {}
        except Exception:
            config = {}
        return config.get(name) or {}

    @classmethod
    def get_compute_config(cls) -> dict:
        merged = dict(_COMPUTE_DEFAULTS)
        merged.update({k: v for k, v in cls.get_section('compute').items() if v is not None})
        return merged

    @classmethod
    def get_tolerances(cls) -> dict:
        merged = dict(_TOLERANCE_DEFAULTS)
        for k, v in cls.get_section('tolerances').items():
            try:
                merged[k] = float(v)
            except (TypeError, ValueError):
                logging.warning(f"容差配置 {k}={v!r} 无效，使用默认值 {merged.get(k)}")
        return merged

    @classmethod
    def get_system_config(cls) -> dict:
        merged = dict(_SYSTEM_DEFAULTS)
        merged.update({k: v for k, v in cls.get_section('system').items() if v is not None})
        env_out = os.environ.get('ROTALG_OUTPUT_DIR')
        if env_out:
            merged['output_dir'] = env_out
        env_level = os.environ.get('ROTALG_LOG_LEVEL')
        if env_level:
            merged['log_level'] = env_level
        merged['output_dir'] = cls.resolve_path(merged['output_dir'])
        merged['log_dir'] = cls.resolve_path(merged['log_dir'])
        return merged

    @classmethod
    def get_worker_count(cls) -> int:
        """Worker cap for grid fan-out.
        Priority: env ROTALG_THREADS -> compute.threads in config -> os.cpu_count().
        """
        env_threads = _env_int('ROTALG_THREADS')
        if env_threads is not None:
            return max(1, env_threads)
        cfg_threads = cls.get_compute_config().get('threads')
        try:
            if cfg_threads is not None:
                return max(1, int(cfg_threads))
        except (TypeError, ValueError):
            logging.warning(f"compute.threads={cfg_threads!r} 无效，改用 CPU 核数")
        return max(1, os.cpu_count() or 1)
