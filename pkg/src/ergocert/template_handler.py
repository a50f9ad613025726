import logging

from jinja2 import Environment
from jinja2 import FileSystemLoader
from jinja2 import PackageLoader
from jinja2 import StrictUndefined

logger = logging.getLogger(__name__)


class TemplateHandler(object):
    def __init__(self):
        pass

    def render(self, template, **kwargs):
        raise NotImplementedError()


class Jinja2TemplateHandler(TemplateHandler):
    def __init__(self, template_env):
        self.template_env = template_env

    def render(self, template, **kwargs):
        template = self.template_env.get_template(template)

        return template.render(**kwargs)


def fmt(value, spec=".6g"):
    """Number formatting filter, tolerant of None."""
    if value is None:
        return "-"
    return format(value, spec)


def make_environment(template_dir=None):
    """
    Text report environment over a template directory, or over the
    templates shipped with the package.
    """
    if template_dir:
        loader = FileSystemLoader(template_dir)
    else:
        loader = PackageLoader("ergocert", "templates")
    env = Environment(
        loader=loader,
        autoescape=False,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
        undefined=StrictUndefined,
    )
    env.filters["fmt"] = fmt
    return env
