"""Load-time plugin registry: named implementations ("units") of named
interfaces, registered once during startup and instantiated by name.

Units self-register through the `unit` decorator when their module is
imported; `register_all_units()` imports every built-in unit module and then
freezes the registry, so every entry point sees the same frozen contents
regardless of import order.

Unit constructors may call `create()` for other units they depend on;
construction cycles are not detected (a cycle recurses until the
interpreter's recursion limit trips).
"""

import importlib
import inspect
import threading


class RegistryError(Exception):
    pass


class DuplicateUnitError(RegistryError):
    pass


class UnknownUnitError(RegistryError):
    pass


class ConfigError(Exception):
    pass


class ConfigTypeError(ConfigError):
    pass


_SCALAR_TYPES = (str, int, float, bool)


class _Missing:
    pass


_MISSING = _Missing()


class ConfigMap:
    """Ordered string-keyed map of scalar values with strict typed access.

    Reading a present key through the accessor of a different type is an
    error, never a coercion (an int is not a float).  The canonical text
    form is one `key = value` per line with `#` comments.
    """

    def __init__(self, values=None):
        self._values = {}
        if values:
            for k, v in values.items():
                self.set(k, v)

    def set(self, key, value):
        if not isinstance(key, str) or not key:
            raise ConfigError(f"config key must be a non-empty string, got {key!r}")
        if isinstance(value, bool):
            pass  # bool first: it is a subtype of int
        elif not isinstance(value, _SCALAR_TYPES):
            raise ConfigError(f"config value for {key!r} must be a scalar, "
                              f"got {type(value).__name__}")
        if isinstance(value, str) and "\n" in value:
            raise ConfigError(f"config value for {key!r} must not contain newlines")
        self._values[key] = value

    def _get(self, key, want, default):
        if key not in self._values:
            if default is _MISSING:
                raise ConfigError(f"missing config key {key!r}")
            return default
        v = self._values[key]
        if want is bool:
            ok = isinstance(v, bool)
        elif want is int:
            ok = isinstance(v, int) and not isinstance(v, bool)
        elif want is float:
            ok = isinstance(v, float)
        else:
            ok = isinstance(v, str)
        if not ok:
            raise ConfigTypeError(
                f"config key {key!r} holds {type(v).__name__} {v!r}, "
                f"accessed as {want.__name__}")
        return v

    def get_str(self, key, default=_MISSING):
        return self._get(key, str, default)

    def get_int(self, key, default=_MISSING):
        return self._get(key, int, default)

    def get_float(self, key, default=_MISSING):
        return self._get(key, float, default)

    def get_bool(self, key, default=_MISSING):
        return self._get(key, bool, default)

    def __contains__(self, key):
        return key in self._values

    def __len__(self):
        return len(self._values)

    def keys(self):
        return self._values.keys()

    def items(self):
        return self._values.items()

    def raw(self, key):
        return self._values[key]

    def copy(self):
        return ConfigMap(self._values)

    def update(self, other):
        for k, v in other.items():
            self.set(k, v)

    def to_text(self) -> str:
        lines = []
        for k, v in self._values.items():
            lines.append(f"{k} = {format_scalar(v)}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "ConfigMap":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            cfg.set(key.strip(), parse_scalar(value.strip()))
        return cfg


def format_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_scalar(text: str):
    """Infer the scalar type: bool keywords, then int, then float, else str."""
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text, 10)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


class UnitDescriptor:
    __slots__ = ("interface_name", "impl_name", "constructor", "registered_at")

    def __init__(self, interface_name, impl_name, constructor, registered_at=None):
        self.interface_name = interface_name
        self.impl_name = impl_name
        self.constructor = constructor
        self.registered_at = registered_at

    def __repr__(self):
        return f"UnitDescriptor({self.interface_name!r}, {self.impl_name!r})"


class Registry:
    def __init__(self):
        self._units = {}
        self._frozen = False
        self._lock = threading.Lock()

    @property
    def frozen(self):
        return self._frozen

    def register(self, descriptor: UnitDescriptor):
        with self._lock:
            if self._frozen:
                raise RegistryError(
                    f"registry is frozen; cannot register "
                    f"{descriptor.interface_name}/{descriptor.impl_name} after init")
            key = (descriptor.interface_name, descriptor.impl_name)
            if key in self._units:
                prev = self._units[key]
                where = ""
                if prev.registered_at or descriptor.registered_at:
                    where = (f" (first registered at {prev.registered_at}, "
                             f"duplicate at {descriptor.registered_at})")
                raise DuplicateUnitError(
                    f"unit {descriptor.interface_name!r}/{descriptor.impl_name!r} "
                    f"registered twice{where}")
            self._units[key] = descriptor

    def freeze(self):
        with self._lock:
            self._frozen = True

    def create(self, interface_name: str, impl_name: str, config: ConfigMap):
        key = (interface_name, impl_name)
        desc = self._units.get(key)
        if desc is None:
            available = self.list_units(interface_name)
            raise UnknownUnitError(
                f"no unit {impl_name!r} for interface {interface_name!r}; "
                f"available: {', '.join(available) if available else '(none)'}")
        return desc.constructor(config)

    def list_units(self, interface_name: str):
        return sorted(impl for iface, impl in self._units if iface == interface_name)


GLOBAL_REGISTRY = Registry()


def unit(interface_name: str, impl_name: str, registry=None):
    """Decorator: register the decorated callable as a unit constructor."""
    frame = inspect.stack()[1]
    site = f"{frame.filename}:{frame.lineno}"

    def deco(ctor):
        (registry or GLOBAL_REGISTRY).register(
            UnitDescriptor(interface_name, impl_name, ctor, registered_at=site))
        return ctor

    return deco


_UNIT_MODULES = (
    "simkit.fluid.sim",
    "simkit.fluid.scenes",
)

_registered = False


def register_all_units():
    """Import every built-in unit module, then freeze the global registry.

    Idempotent; call first in every entry point.
    """
    global _registered
    if _registered:
        return GLOBAL_REGISTRY
    for mod in _UNIT_MODULES:
        importlib.import_module(mod)
    GLOBAL_REGISTRY.freeze()
    _registered = True
    return GLOBAL_REGISTRY
