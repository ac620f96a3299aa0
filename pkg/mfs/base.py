"""Base classes for MFS."""
import copy
import inspect
import logging
from abc import ABCMeta
from collections import defaultdict

LGR = logging.getLogger(__name__)


class MFSBase(metaclass=ABCMeta):
    """Base class for parameterized MFS objects.

    Provides the small set of features shared by capture models, detectors, scenarios and
    result containers:

    - a ``__repr__`` listing the constructor parameters that differ from their defaults,
    - ``get_params``/``set_params`` in the scikit-learn style, including nested
      ``<component>__<parameter>`` keys,
    - ``copy`` for independent clones.

    Parameters are whatever the subclass ``__init__`` declares, and each one must be stored
    on an attribute of the same name.
    """

    def __repr__(self):
        """Show the class name and every non-default parameter."""
        signature = inspect.signature(self.__init__)
        defaults = {
            name: param.default
            for name, param in signature.parameters.items()
            if param.default is not inspect.Parameter.empty
        }

        param_strs = []
        for key, value in self.get_params(deep=False).items():
            default = defaults.get(key, inspect.Parameter.empty)
            if _safe_equal(default, value):
                continue
            param_strs.append(f"{key}='{value}'" if isinstance(value, str) else f"{key}={value}")

        return f"{self.__class__.__name__}({', '.join(param_strs)})"

    @classmethod
    def _get_param_names(cls):
        """Collect the constructor parameter names, sorted."""
        init = cls.__init__
        if init is object.__init__:
            return []

        names = []
        for param in inspect.signature(init).parameters.values():
            if param.name == "self" or param.kind == param.VAR_KEYWORD:
                continue
            if param.kind == param.VAR_POSITIONAL:
                raise RuntimeError(
                    f"{cls.__name__} must declare its parameters explicitly in __init__ "
                    "(no *args)."
                )
            names.append(param.name)
        return sorted(names)

    def get_params(self, deep=True):
        """Get parameters for this object.

        Parameters
        ----------
        deep : :obj:`bool`, optional
            If True, also return the parameters of contained MFS objects, using
            ``<component>__<parameter>`` keys. Default is True.

        Returns
        -------
        params : :obj:`dict`
            Parameter names mapped to their values.
        """
        out = {}
        for key in self._get_param_names():
            value = getattr(self, key, None)
            if deep and hasattr(value, "get_params"):
                out.update((f"{key}__{k}", v) for k, v in value.get_params().items())
            out[key] = value
        return out

    def set_params(self, **params):
        """Set the parameters of this object.

        Nested objects are reached with ``<component>__<parameter>`` keys.

        Returns
        -------
        self
        """
        if not params:
            return self

        valid_params = self.get_params(deep=True)
        nested_params = defaultdict(dict)
        for key, value in params.items():
            key, delim, sub_key = key.partition("__")
            if key not in valid_params:
                raise ValueError(
                    f"Invalid parameter '{key}' for {self.__class__.__name__}. "
                    f"Valid parameters are: {', '.join(self._get_param_names())}."
                )

            if delim:
                nested_params[key][sub_key] = value
            else:
                setattr(self, key, value)
                valid_params[key] = value

        for key, sub_params in nested_params.items():
            valid_params[key].set_params(**sub_params)

        return self

    def copy(self):
        """Return a deep copy of the object."""
        return copy.deepcopy(self)


def _safe_equal(a, b):
    """Compare two parameter values without tripping over array truthiness."""
    try:
        return bool(a == b)
    except (TypeError, ValueError):
        return a is b
