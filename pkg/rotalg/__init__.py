from rotalg.config.settings import Config
import logging
from logging.handlers import RotatingFileHandler
import os


def configure_logging(level=None, log_to_file: bool = True):
    """根日志：滚动文件 logs/rotalg.log + 标准错误输出"""
    system_cfg = Config.get_system_config()
    level_name = level or system_cfg.get('log_level') or 'INFO'
    if isinstance(level_name, str):
        resolved = logging.getLevelName(level_name.upper())
        if not isinstance(resolved, int):
            resolved = logging.INFO
    else:
        resolved = int(level_name)

    root_logger = logging.getLogger()
    root_logger.setLevel(resolved)
    fmt = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handlers = []
    if log_to_file:
        log_dir = system_cfg.get('log_dir') or 'logs'
        try:
            os.makedirs(log_dir, exist_ok=True)
            file_handler = RotatingFileHandler(
                os.path.join(log_dir, 'rotalg.log'), maxBytes=5 * 1024 * 1024, backupCount=3, encoding='utf-8'
            )
            file_handler.setFormatter(fmt)
            handlers.append(file_handler)
        except OSError as e:
            logging.warning(f"无法创建日志文件，仅输出到终端: {e}")
    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(fmt)
    handlers.append(stream_handler)
    for handler in root_logger.handlers:
        if isinstance(handler, RotatingFileHandler):
            handler.close()
    root_logger.handlers = handlers
    return root_logger
