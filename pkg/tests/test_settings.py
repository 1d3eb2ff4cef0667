from pathlib import Path

import pytest

from qdemux import ConfigError
from qdemux.settings import DEFAULTS, Setting, Settings

ENVFILE = '''\
# runtime settings
QDEMUX_THREADS=4
QDEMUX_OUT="${HOME_DIR}/runs"
HOME_DIR=/data
LITERAL='${HOME_DIR}'
QDEMUX_BIN_WIDTH_PS=25.5
FLAGS=on
CHANNELS=1:2:3
BLANK=
'''


@pytest.fixture
def settings(tmp_path: Path):
    """Settings backed by a dotenv file and an empty environment."""
    envfile = tmp_path / '.env'
    envfile.write_text(ENVFILE)
    return Settings(envfile, environ_={})


class TestSettings:
    """Settings file reader"""

    def test_getitem(self, settings: Settings):
        """it can get declared settings"""
        assert settings['QDEMUX_THREADS'] == '4'
        assert settings['BLANK'] == ''

    def test_interpolation(self, settings: Settings):
        """it can interpolate variables declared later in the file"""
        assert settings['QDEMUX_OUT'] == '/data/runs'

    def test_no_interpolation(self, settings: Settings):
        """it keeps single-quoted values literal"""
        assert settings['LITERAL'] == '${HOME_DIR}'

    def test_environment_wins(self, tmp_path: Path):
        """it prefers the environment over the file"""
        envfile = tmp_path / '.env'
        envfile.write_text(ENVFILE)
        settings = Settings(envfile, environ_={'QDEMUX_THREADS': '8'})
        assert settings.int('QDEMUX_THREADS') == 8

    def test_defaults(self):
        """it falls back to the built-in defaults"""
        settings = Settings(environ_={})
        assert settings['QDEMUX_TAG_FORMAT'] == DEFAULTS['QDEMUX_TAG_FORMAT']
        assert settings.threads() == 1
        assert settings.vars == {}

    def test_get(self, settings: Settings):
        """it returns default values for optional settings"""
        assert settings.get('BLANK', 'default') == ''
        assert settings.get('MISSING') is None
        assert settings.get('MISSING', 'default') == 'default'

    def test_getitem_missing(self, settings: Settings):
        """it raises ConfigError for missing required settings"""
        with pytest.raises(ConfigError) as err:
            _ = settings['MISSING']
        assert 'Missing' in str(err.value)

    def test_vars(self, settings: Settings):
        """it collects the declared key-value pairs"""
        assert settings.vars['FLAGS'] == 'on'
        assert 'QDEMUX_TAG_FORMAT' not in settings.vars
        assert len(settings.vars) == 8

    def test_invalid_envfile(self):
        """it raises ConfigError for a missing settings file"""
        with pytest.raises(ConfigError) as err:
            _ = Settings('/invalidfile')
        assert 'does not exist' in str(err.value)

    def test_threads(self, tmp_path: Path):
        """it rejects a non-positive thread count"""
        settings = Settings(environ_={'QDEMUX_THREADS': '0'})
        with pytest.raises(ConfigError) as err:
            settings.threads()
        assert 'QDEMUX_THREADS' in str(err.value)


class TestSettingsCasting:
    """Type-casting"""

    def test_bool(self, settings: Settings):
        """it can cast to bool"""
        _val = settings.bool('FLAGS')
        assert _val and type(_val) is bool
        assert settings.bool('MISSING', False) is False
        assert settings.bool('MISSING') is None
        with pytest.raises(ConfigError) as err:
            _ = settings.bool('QDEMUX_BIN_WIDTH_PS')
        assert 'Invalid boolean' in str(err.value)

    def test_int(self, settings: Settings):
        """it can cast to int"""
        _val = settings.int('QDEMUX_THREADS')
        assert _val == 4 and type(_val) is int
        assert settings.int('MISSING', -2) == -2
        with pytest.raises(ConfigError) as err:
            _ = settings.int('CHANNELS')
        assert 'Invalid integer' in str(err.value)

    def test_float(self, settings: Settings):
        """it can cast to float"""
        _val = settings.float('QDEMUX_BIN_WIDTH_PS')
        assert _val == 25.5 and type(_val) is float
        assert settings.float('MISSING', -3.1) == -3.1
        with pytest.raises(ConfigError) as err:
            _ = settings.float('CHANNELS')
        assert 'Invalid numerical' in str(err.value)

    def test_list(self, settings: Settings):
        """it can cast to list"""
        assert settings.list('CHANNELS', separator=':') == ['1', '2', '3']
        assert settings.list('MISSING', ['a']) == ['a']
        assert settings.list('MISSING') is None


class TestSetting:
    """Setting declaration parser"""

    def test_unquoted(self):
        """it can parse unquoted settings"""
        s = Setting('key = value\n')
        assert s.key == 'key'
        assert s.value == 'value'
        assert s.interpolate

    def test_double_quoted(self):
        """it can parse double-quoted settings"""
        s = Setting('key = "value"\n')
        assert s.value == 'value'
        assert s.interpolate

    def test_single_quoted(self):
        """it can parse single-quoted settings"""
        s = Setting("key = 'value'\n")
        assert s.value == 'value'
        assert not s.interpolate

    def test_blank_value(self):
        """it can parse blank settings"""
        assert Setting('key=').value == ''
        assert Setting('key=""').value == ''
        assert Setting("key=''").value == ''

    def test_blank_line(self):
        """it ignores blank and comment lines"""
        assert Setting('\n') is None
        assert Setting(' \t ') is None
        assert Setting('# comment') is None

    def test_invalid_key(self):
        """it raises ConfigError for invalid keys"""
        for line in ('221b="starts with number"', '_="not assignable"',
                     'o-o="invalid character"'):
            with pytest.raises(ConfigError) as err:
                _ = Setting(line)
            assert 'Invalid key' in str(err.value)

    def test_mismatched_quote(self):
        """it raises ConfigError for mismatched quotes"""
        for line in ('double="missing-closing', 'double=missing-opening"',
                     "single='missing-closing", "both=\"mismatched'"):
            with pytest.raises(ConfigError) as err:
                _ = Setting(line)
            assert 'Mismatched quotes' in str(err.value)

    def test_surplus_token(self):
        """it raises ConfigError for surplus tokens"""
        with pytest.raises(ConfigError) as err:
            _ = Setting('surplus=this must be quoted')
        assert 'Surplus token' in str(err.value)
