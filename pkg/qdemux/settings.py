"""Runtime settings read from a dotenv file and the environment."""

from __future__ import annotations

import builtins
from functools import cached_property
from os import PathLike, environ, fspath, path
from re import Match, compile as regex
from shlex import shlex
from typing import Iterator, Mapping, overload

from . import utils
from .errors import ConfigError

#: Recognized keys and their defaults.
DEFAULTS: dict[str, str] = {
    'QDEMUX_THREADS': '1',
    'QDEMUX_LOG_LEVEL': 'WARNING',
    'QDEMUX_OUT': 'qdemux-out',
    'QDEMUX_BIN_WIDTH_PS': '50',
    'QDEMUX_TAG_FORMAT': 'text',
}


class Setting:
    """
    A ``KEY=value`` declaration from a settings file.

    Attributes
    ----------
    key : str
        The name of the setting.
    value : str
        The raw value, with quotes removed.
    interpolate : bool
        Whether ``${NAME}`` references in the value are expanded.
    """

    key: str
    value: str
    interpolate: bool

    def __new__(cls, line: str) -> Setting | None:  # type: ignore[misc]
        """
        Parse a line and return a new instance or ``None``.

        Parameters
        ----------
        line : str
            The line to be parsed.

        Returns
        -------
        Setting | None
            A new ``Setting``, or ``None`` for blank and comment lines.

        Raises
        ------
        ConfigError
            If the line cannot be parsed.

        Examples
        --------
        >>> Setting('QDEMUX_THREADS=4').value
        '4'
        >>> print(Setting('# comment'))
        None
        """
        lex = shlex(line)

        key = lex.read_token()
        if not key:
            return None

        if (
            not all(c in lex.wordchars for c in key)
            or lex.get_token() != '='
            or key == '_' or key[0] in '0123456789'
        ):
            raise ConfigError(f'Invalid key in line: {line.strip()}')

        lex.whitespace_split = True
        try:
            value = lex.read_token()
        except ValueError as e:
            raise ConfigError(
                f'Mismatched quotes in line: {line.strip()}'
            ) from e

        if lex.read_token():
            raise ConfigError(f'Surplus token in line: {line.strip()}')

        instance = super().__new__(cls)
        instance.key = key
        instance.value = value
        instance.interpolate = bool(value)

        for quote in ('"', "'"):
            if value and (value[0] == quote or value[-1] == quote):
                if len(value) < 2 or value[0] != value[-1]:
                    raise ConfigError(
                        f'Mismatched quotes in line: {line.strip()}'
                    )
                instance.value = value[1:-1]
                instance.interpolate = quote == '"'
                break
        return instance

    def __iter__(self) -> Iterator[str]:
        yield self.key
        yield self.value

    def __repr__(self) -> str:  # pragma: no cover
        return f"Setting('{self.key}', '{self.value}')"


class Settings:
    """
    Typed access to ``QDEMUX_*`` settings.

    Values are looked up in :os:`environ` first, then in the settings
    file, then in :data:`DEFAULTS`.

    Parameters
    ----------
    envfile : str | :os:`PathLike` | None
        An optional dotenv-style settings file.
    environ_ : Mapping[str, str] | None
        The environment to consult, :os:`environ` by default.

    Examples
    --------
    >>> settings = Settings('.env')
    >>> settings.int('QDEMUX_THREADS')
    4
    """

    def __init__(self, envfile: str | PathLike[str] | None = None,
                 environ_: Mapping[str, str] | None = None) -> None:
        if envfile is not None and not path.isfile(envfile):
            raise ConfigError(f"Settings file '{fspath(envfile)}' "
                              'does not exist')
        self.envfile = envfile
        self.ENV: Mapping[str, str] = environ if environ_ is None \
            else environ_

    def __getitem__(self, key: str) -> str:
        value = self.get(key)
        if value is None:
            raise ConfigError(f"Missing setting: '{key}'")
        return value

    def __repr__(self) -> str:  # pragma: no cover
        return f"Settings('{self.envfile}')"

    @cached_property
    def vars(self) -> dict[str, str]:
        """`dict[str, str]` : The settings declared in the file."""
        if self.envfile is None:
            return {}

        def _sub_callback(match: Match[str]) -> str:
            return ({**self.ENV, **result}).get(match.group(1), '')

        with open(self.envfile, 'r') as f:
            declared = [s for s in map(Setting, f) if s is not None]
        result = dict(declared)  # type: ignore[arg-type]

        posix = regex(r'\$\{([^}]*)\}')
        for setting in declared:
            if setting.interpolate:
                result[setting.key] = posix.sub(_sub_callback, setting.value)
        return result

    @overload
    def get(self, key: str, default: str) -> str: ...

    @overload
    def get(self, key: str, default: None = None) -> str | None: ...

    def get(self, key: str, default: str | None = None) -> str | None:
        """
        Return a setting, or a default value.

        Parameters
        ----------
        key : str
            The name of the setting.
        default : str | None
            The value used when the setting is not defined anywhere.
            :data:`DEFAULTS` is consulted before it.

        Returns
        -------
        str | None
            The value of the setting.
        """
        value = self.ENV.get(key, self.vars.get(key))
        if value is None:
            value = DEFAULTS.get(key, default)
        return value

    @overload
    def bool(self, key: str, default: bool) -> bool: ...

    @overload
    def bool(self, key: str, default: None = None) -> bool | None: ...

    def bool(self, key: str, default: bool | None = None) -> bool | None:
        """
        Return a setting as a ``bool``, or a default value.

        Raises
        ------
        ConfigError
            If the setting cannot be cast to ``bool``.
        """
        value = self.get(key)
        if value is None:
            return default
        if utils.is_truthy(value):
            return True
        if utils.is_falsy(value):
            return False
        raise ConfigError(f"Invalid boolean value for {key}: '{value}'")

    @overload
    def int(self, key: str, default: int) -> int: ...

    @overload
    def int(self, key: str, default: None = None) -> int | None: ...

    def int(self, key: str, default: int | None = None) -> int | None:
        """
        Return a setting as an ``int``, or a default value.

        Raises
        ------
        ConfigError
            If the setting cannot be cast to ``int``.
        """
        value = self.get(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError as e:
            raise ConfigError(
                f"Invalid integer value for {key}: '{value}'"
            ) from e

    @overload
    def float(self, key: str, default: float) -> float: ...

    @overload
    def float(self, key: str, default: None = None) -> float | None: ...

    def float(self, key: str, default: float | None = None) -> float | None:
        """
        Return a setting as a ``float``, or a default value.

        Raises
        ------
        ConfigError
            If the setting cannot be cast to ``float``.
        """
        value = self.get(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError as e:
            raise ConfigError(
                f"Invalid numerical value for {key}: '{value}'"
            ) from e

    @overload
    def list(self, key: str, default: builtins.list[str],
             separator: str = ...) -> builtins.list[str]: ...

    @overload
    def list(self, key: str, default: None = None,
             separator: str = ...) -> builtins.list[str] | None: ...

    def list(self, key: str, default: builtins.list[str] | None = None,
             separator: str = ',') -> builtins.list[str] | None:
        """Return a setting split on ``separator``, or a default value."""
        value = self.get(key)
        if value is None:
            return default
        return [item.strip() for item in value.split(separator)]

    def threads(self) -> builtins.int:
        """
        Return the default worker count.

        Raises
        ------
        ConfigError
            If ``QDEMUX_THREADS`` is not a positive integer.
        """
        threads = self.int('QDEMUX_THREADS', 1)
        if threads < 1:
            raise ConfigError(
                f"Invalid value for QDEMUX_THREADS: '{threads}'"
            )
        return threads


__all__ = ['DEFAULTS', 'Setting', 'Settings']
