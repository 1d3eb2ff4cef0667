import json
from pathlib import Path

import pytest

from qdemux.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, run


@pytest.fixture(autouse=True)
def workdir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    """Run every command in an empty directory without QDEMUX_ variables."""
    for name in ('QDEMUX_THREADS', 'QDEMUX_OUT', 'QDEMUX_LOG_LEVEL',
                 'QDEMUX_BIN_WIDTH_PS', 'QDEMUX_TAG_FORMAT'):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def config(workdir: Path):
    target = workdir / 'scenario.json'
    target.write_text(json.dumps({
        'experiment': 'hbt_h',
        'seed': 12,
        'sequence': {'n_periods': 4000},
    }))
    return target


class TestModel:
    """model command"""

    def test_correction(self, capsys: pytest.CaptureFixture[str]):
        """it prints the corrected HOM visibility"""
        assert run(['model', '--eq1', '0.876', '0.028', '0.47',
                    '0.53']) == EXIT_OK
        assert capsys.readouterr().out == '0.937\n'

    def test_visibility(self, capsys: pytest.CaptureFixture[str]):
        """it prints the visibility of FSS-split photons"""
        assert run(['model', '--eq2', '170', '7']) == EXIT_OK
        assert float(capsys.readouterr().out) \
            == pytest.approx(0.234, abs=1e-3)

    def test_map(self, workdir: Path):
        """it writes the visibility map and its line cut"""
        assert run(['model', '--map', '--points', '10', '--out',
                    str(workdir / 'out')]) == EXIT_OK
        lines = (workdir / 'out' / 'visibility_map.txt').read_text() \
            .splitlines()
        assert len(lines) == 102
        cut = (workdir / 'out' / 'line_cut.txt').read_text().splitlines()
        assert cut[1] == '# fss_ueV visibility'
        assert len(cut) == 12

    def test_invalid(self, capsys: pytest.CaptureFixture[str]):
        """it exits with status 1 for invalid parameters"""
        assert run(['model', '--eq1', '0.8', '1.2', '0.5',
                    '0.5']) == EXIT_CONFIG
        assert 'Invalid g2' in capsys.readouterr().err


class TestBudget:
    """budget command"""

    def test_passive(self, capsys: pytest.CaptureFixture[str]):
        """it needs no EOM for two passively split modes"""
        assert run(['budget', '--n', '2', '--passive']) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report['eom_count'] == 0
        assert report['rate'] == pytest.approx(40e6)
        assert report['limiting_factor'] == 'rep-rate'

    def test_sweep(self, capsys: pytest.CaptureFixture[str]):
        """it tabulates a sweep over mode counts"""
        assert run(['budget', '--n', '4', '--sweep', '4']) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report['eom_count'] == 3
        assert [row['n_modes'] for row in report['sweep']] == [1, 2, 3, 4]

    def test_invalid(self, capsys: pytest.CaptureFixture[str]):
        """it exits with status 1 for an invalid scheme"""
        assert run(['budget', '--n', '0']) == EXIT_CONFIG
        assert "'n_modes'" in capsys.readouterr().err

    def test_log_level(self, workdir: Path,
                       capsys: pytest.CaptureFixture[str]):
        """it exits with status 1 for an unknown log level"""
        (workdir / '.env').write_text('QDEMUX_LOG_LEVEL=loud\n')
        assert run(['budget', '--n', '2']) == EXIT_CONFIG
        assert "Invalid QDEMUX_LOG_LEVEL: 'LOUD'" in capsys.readouterr().err


class TestSimulateAnalyze:
    """simulate and analyze commands"""

    def test_round_trip(self, config: Path, workdir: Path,
                        capsys: pytest.CaptureFixture[str]):
        """it simulates tag files and extracts g2 from them"""
        out = workdir / 'out'
        assert run(['simulate', '--config', str(config), '--out',
                    str(out)]) == EXIT_OK
        printed = capsys.readouterr().out.split()
        assert printed == [str(out / 'hbt_h_ch1.txt'),
                           str(out / 'hbt_h_ch2.txt')]
        assert (out / 'hbt_h_histogram.txt').is_file()
        saved = json.loads((out / 'hbt_h_scenario.json').read_text())
        assert saved['seed'] == 12

        assert run(['analyze', '--g2', *printed, '--out',
                    str(out)]) == EXIT_OK
        result = json.loads(capsys.readouterr().out)
        assert result['value'] < 0.005
        assert result['provenance']['seed'] == 12
        assert (out / 'g2_histogram.txt').is_file()
        assert json.loads((out / 'analysis.json').read_text()) == result

    def test_overrides(self, config: Path, workdir: Path):
        """it applies seed, experiment and period overrides"""
        out = workdir / 'out'
        assert run(['simulate', '--config', str(config), '--out', str(out),
                    '--seed', '4', '--experiment', 'lifetime',
                    '--periods', '100']) == EXIT_OK
        saved = json.loads((out / 'lifetime_scenario.json').read_text())
        assert saved['seed'] == 4
        assert saved['sequence']['n_periods'] == 100

    def test_binary_tags(self, config: Path, workdir: Path):
        """it writes binary tag files when the settings ask for them"""
        (workdir / '.env').write_text('QDEMUX_TAG_FORMAT=binary\n'
                                      'QDEMUX_OUT=from-env\n')
        assert run(['simulate', '--config', str(config)]) == EXIT_OK
        assert (workdir / 'from-env' / 'hbt_h_ch1.npz').is_file()

    def test_table_experiment(self, workdir: Path):
        """it writes the Rabi map as a table"""
        target = workdir / 'rabi.json'
        target.write_text(json.dumps({
            'experiment': 'rabi_map',
            'scan': {'areas': [0.0, 1.0, 2.0], 'detunings': [0.0]},
        }))
        assert run(['simulate', '--config', str(target), '--out',
                    str(workdir)]) == EXIT_OK
        lines = (workdir / 'rabi_map.txt').read_text().splitlines()
        assert lines[1] == '# area detuning_hz probability'
        assert len(lines) == 5

    def test_config_error(self, workdir: Path,
                          capsys: pytest.CaptureFixture[str]):
        """it exits with status 1 for an invalid scenario"""
        target = workdir / 'bad.json'
        target.write_text('{"qd": {"t1_x": "fast"}}')
        assert run(['simulate', '--config', str(target)]) == EXIT_CONFIG
        err = capsys.readouterr().err
        assert 'Invalid scenario' in err
        assert 'scenario.qd.t1_x' in err
        assert run(['simulate', '--config', 'missing.json']) == EXIT_CONFIG

    def test_data_error(self, workdir: Path,
                        capsys: pytest.CaptureFixture[str]):
        """it exits with status 2 for unreadable tag files"""
        junk = workdir / 'junk.txt'
        junk.write_text('not tags\n')
        assert run(['analyze', '--g2', str(junk), str(junk)]) \
            == EXIT_RUNTIME
        assert 'Not a tag file' in capsys.readouterr().err

    def test_usage(self):
        """it exits with status 1 for an invalid command line"""
        with pytest.raises(SystemExit) as err:
            _ = run(['analyze'])
        assert err.value.code == EXIT_CONFIG
