import re


def build_filename(command: str, expr: str, extension: str) -> str:
    """根据命令与表达式生成统一的输出文件名。
    - 伴随记号 ' 记作 adj，其余非字母数字字符折叠为下划线
    - 限长 40，空表达式只保留命令名
    """
    slug = (expr or "").replace("'", "adj")
    slug = re.sub(r"[^A-Za-z0-9]+", "_", slug).strip("_")
    if len(slug) > 40:
        slug = slug[:40].rstrip("_")
    stem = f"{command}_{slug}" if slug else command
    return f"{stem}.{extension.lstrip('.')}"
