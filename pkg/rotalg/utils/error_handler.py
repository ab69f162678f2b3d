from functools import wraps
import logging
import sys
import traceback

from rotalg.models.errors import ExpressionError, ExpressionSyntaxError, InputFormatError, RotAlgError

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_SYNTAX = 2
EXIT_DOMAIN = 3
EXIT_IO = 4
EXIT_INTERRUPTED = 130


def _report(label: str, message: str) -> None:
    print(f"[ERROR] {label}: {message}", file=sys.stderr)


def cli_error_handler(f):
    """CLI 命令统一异常处理装饰器：异常映射为退出码"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            code = f(*args, **kwargs)
            return EXIT_OK if code is None else code
        except ExpressionError as e:
            logging.warning(f"ExpressionError in {f.__name__}: {str(e)}")
            label = '表达式语法错误'
            if isinstance(e, ExpressionSyntaxError) and e.position is not None:
                label = f'表达式语法错误（位置 {e.position}）'
            _report(label, e.message)
            return EXIT_SYNTAX
        except InputFormatError as e:
            logging.warning(f"InputFormatError in {f.__name__}: {str(e)}")
            _report('输入文件格式错误', str(e))
            return EXIT_IO
        except RotAlgError as e:
            logging.warning(f"{type(e).__name__} in {f.__name__}: {str(e)}")
            _report('参数错误', str(e))
            return EXIT_DOMAIN
        except FileNotFoundError as e:
            logging.warning(f"FileNotFoundError in {f.__name__}: {str(e)}")
            _report('文件未找到', str(e))
            return EXIT_IO
        except PermissionError as e:
            logging.error(f"PermissionError in {f.__name__}: {str(e)}")
            _report('权限错误', str(e))
            return EXIT_IO
        except (OSError, UnicodeDecodeError) as e:
            logging.error(f"{type(e).__name__} in {f.__name__}: {str(e)}")
            _report('读写错误', str(e))
            return EXIT_IO
        except ValueError as e:
            logging.warning(f"ValueError in {f.__name__}: {str(e)}")
            _report('参数错误', str(e))
            return EXIT_DOMAIN
        except KeyboardInterrupt:
            print("\n[CANCELLED] 用户中断", file=sys.stderr)
            return EXIT_INTERRUPTED
        except Exception as e:
            logging.exception(f"Unhandled exception in {f.__name__}")
            logging.error(traceback.format_exc())
            _report('系统错误', f'{type(e).__name__}: {str(e)}')
            return EXIT_UNEXPECTED

    return decorated_function
