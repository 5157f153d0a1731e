# this module extends pyyaml
import yaml
from yaml import *  # noqa: F403, F401

dump_kwargs = {
    'sort_keys': False,
    'default_style': None,
    'default_flow_style': False,
    'allow_unicode': True,
}

import io

from . import ERROR, ParseError, abspath, logger
from .base import ReadWrite


class Yaml(ReadWrite):
    """YAML run configuration"""

    def scan(self):
        pass

    def parse(self, section, dtype='dict'):
        fpath = self.name
        logger.debug(f'read yaml file\n  {fpath}')
        with open(fpath, encoding='utf-8') as f:
            return loads(f.read(), source=fpath)

    @classmethod
    def write(cls, fpath, data, **kwargs):
        fpath = abspath(fpath)
        with open(fpath, 'w', encoding='utf-8') as f:
            f.write(dumps(data, **kwargs) + '\n')
        logger.debug(f'wrote yaml file\n  {fpath}')
        return fpath


# -------------------------------------------------------


def loads(astr: str, source='<string>'):
    try:
        return yaml.safe_load(astr)
    except yaml.MarkedYAMLError as err:
        mark = err.problem_mark
        line, col = (mark.line + 1, mark.column + 1) if mark else (None, None)
        ERROR(
            f"{source}:{line}:{col}: {err.problem}",
            ParseError(f"{source}:{line}:{col}: {err.problem}", line, col),
        )
    except yaml.YAMLError as err:
        ERROR(f"{source}: {err}", ParseError(f"{source}: {err}"))


def dumps(adict: dict, **kwargs):
    stream = io.StringIO()
    yaml.safe_dump(adict, stream, **{**dump_kwargs, **kwargs})
    stream.seek(0)
    return stream.read().strip()
