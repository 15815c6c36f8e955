import dataclasses

import pandas as pd
import pytest

from cli.app import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_VALIDATION,
    ExperimentConfig,
    ReportFile,
    batch_sweep,
    main,
    parse_sweep,
    run,
)
from models.prep_algorithms import PrepReport
from utils.errors import SimulationError, ValidationError


@pytest.fixture
def alphas_file(tmp_path):
    path = tmp_path / "alphas.csv"
    path.write_text("3\n5\n")
    return str(path)


@pytest.fixture
def division_file(tmp_path):
    path = tmp_path / "division.csv"
    path.write_text("2,1\n4,3\n")
    return str(path)


class TestExperimentConfig:
    def test_unknown_option(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.from_mapping({'mode': 'uniform', 'colour': 'red'})

    def test_dashes_accepted(self):
        config = ExperimentConfig.from_mapping({'mode': 'inverse', 'const-c': 2})
        assert config.const_c == 2

    @pytest.mark.parametrize("options", [
        {'mode': 'teleport'},
        {'mode': 'inverse'},
        {'mode': 'uniform'},
        {'mode': 'general', 'data_path': 'x.csv'},
        {'mode': 'estimate', 'epsilon': 0.75},
        {'mode': 'uniform', 'd': 3, 'aa': -1},
        {'mode': 'uniform', 'd': 3, 'm': 0},
        {'mode': 'uniform', 'd': 3, 'backend': 'gpu'},
        {'mode': 'uniform', 'd': 'three'},
        {'mode': 'uniform', 'd': 2.5},
        {'mode': 'uniform', 'd': 3, 'm': None},
        {'mode': 'estimate', 'epsilon': 'tiny'},
    ])
    def test_invalid(self, options):
        with pytest.raises(ValidationError):
            ExperimentConfig.from_mapping(options).validate()

    def test_numeric_strings_coerced(self):
        # PyYAML reads 1e-5 (no dot) as a string
        config = ExperimentConfig.from_mapping({'mode': 'estimate', 'epsilon': '1e-5', 'm': '5'})
        config.validate()
        assert config.epsilon == 1e-5
        assert config.m == 5


class TestRun:
    def test_uniform(self):
        report = run(ExperimentConfig(mode='uniform', d=3)).report
        assert report['success_probability_final'] == pytest.approx(1.0, abs=1e-10)
        assert report['post_selected_amplitudes'] == pytest.approx([3 ** -0.5] * 3, abs=1e-10)

    def test_inverse_from_file(self, alphas_file):
        report = run(ExperimentConfig(mode='inverse', data_path=alphas_file, m=4)).report
        assert report['counts'] == [6, 4]
        assert report['multiplication_count'] == 2
        assert report['post_selected_amplitudes'] == pytest.approx(
            [6 / 52 ** 0.5, 4 / 52 ** 0.5], abs=1e-10)

    def test_division_from_file(self, division_file):
        report = run(ExperimentConfig(mode='division', data_path=division_file, m=4)).report
        assert report['counts'] == [8, 12]

    def test_division_needs_betas(self, alphas_file):
        with pytest.raises(ValidationError):
            run(ExperimentConfig(mode='division', data_path=alphas_file))

    def test_general_builtin(self, tmp_path):
        path = tmp_path / "values.csv"
        path.write_text("0\n3\n")
        config = ExperimentConfig(mode='general', data_path=str(path), n=2, m=4,
                                  f_name='inv_sqrt_1p', backend='block')
        report = run(config).report
        assert report['counts'] == [16, 8]

    def test_general_from_table_files(self, tmp_path):
        data = tmp_path / "values.csv"
        data.write_text("1\n2\n3\n")
        g_table = tmp_path / "g.csv"
        g_table.write_text("".join(f"{k},{k + 1}\n" for k in range(4)))
        h_table = tmp_path / "h.csv"
        h_table.write_text("".join(f"{j},{j}/8\n" for j in range(8)))
        config = ExperimentConfig(mode='general', data_path=str(data), n=2, m=3,
                                  f_expr='1/(1+x)', g_table=str(g_table), h_table=str(h_table),
                                  backend='block')
        report = run(config).report
        # (1+x) * j < 8
        assert report['counts'] == [4, 3, 2]

    def test_estimate(self):
        report = run(ExperimentConfig(mode='estimate', epsilon=2.0 ** -16)).report
        assert report['multiplications'] == {'inequality': 2, 'newton': 16}

    def test_estimate_with_data(self, tmp_path):
        path = tmp_path / "alphas.csv"
        path.write_text("1\n2\n4\n")
        report = run(ExperimentConfig(mode='estimate', data_path=str(path), m=4)).report
        assert report['methods']['inequality']['aa_rounds'] == 1

    def test_samples(self):
        report = run(ExperimentConfig(mode='uniform', d=3, shots=120, seed=9)).report
        assert sum(s['count'] for s in report['samples']) == 120
        assert {s['label'] for s in report['samples']} <= {0, 1, 2}

    def test_amplitude_csv(self, alphas_file, tmp_path):
        csv_path = tmp_path / "amps.csv"
        run(ExperimentConfig(mode='inverse', data_path=alphas_file, csv_path=str(csv_path)))
        assert pd.read_csv(csv_path)['count'].tolist() == [6, 4]


class TestReportFile:
    def test_yaml_round_trip(self, alphas_file):
        report_file = run(ExperimentConfig(mode='inverse', data_path=alphas_file, m=3))
        restored = ReportFile.from_yaml(report_file.to_yaml())
        assert restored == report_file
        assert PrepReport.from_dict(restored.report).matches(
            PrepReport.from_dict(report_file.report), tol=0.0)

    def test_write_and_read(self, tmp_path):
        path = tmp_path / "report.yaml"
        written = run(ExperimentConfig(mode='uniform', d=5, output_path=str(path)))
        assert ReportFile.read(str(path)) == written

    def test_deterministic(self, alphas_file):
        config = ExperimentConfig(mode='inverse', data_path=alphas_file, m=4, shots=50)
        first = dataclasses.replace(run(config), wall_clock_seconds=0.0)
        second = dataclasses.replace(run(config), wall_clock_seconds=0.0)
        assert first.to_yaml() == second.to_yaml()

    def test_malformed_document(self):
        with pytest.raises(ValidationError):
            ReportFile.from_yaml("- just\n- a list\n")


class TestSweep:
    def test_error_shrinks_with_grid(self, alphas_file):
        template = ExperimentConfig(mode='inverse', data_path=alphas_file)
        df = batch_sweep(template, {'m': list(range(2, 9))})
        errors = df['max_componentwise_error'].tolist()
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
        assert all(e <= 2.0 ** -m for e, m in zip(errors, df['m']))

    def test_empty_grid_writes_header(self, alphas_file, tmp_path):
        path = tmp_path / "sweep.csv"
        template = ExperimentConfig(mode='inverse', data_path=alphas_file)
        df = batch_sweep(template, {'m': []}, output_path=str(path))
        assert df.empty
        assert path.read_text().strip() == "m,max_componentwise_error,fidelity,p_raw,rounds"

    def test_repeated_point(self, alphas_file):
        template = ExperimentConfig(mode='inverse', data_path=alphas_file, aa=0)
        df = batch_sweep(template, {'m': [4, 4]}, workers=2)
        assert df.iloc[0].tolist() == df.iloc[1].tolist()

    def test_unknown_option(self, alphas_file):
        with pytest.raises(ValidationError):
            batch_sweep(ExperimentConfig(data_path=alphas_file), {'colour': [1]})

    @pytest.mark.parametrize("spec,expected", [
        ("m=2:4", ('m', [2, 3, 4])),
        ("backend=dense,block", ('backend', ['dense', 'block'])),
        ("const-c=1,2", ('const_c', [1, 2])),
        ("epsilon=0.25", ('epsilon', [0.25])),
        ("m=", ('m', [])),
    ])
    def test_parse_sweep(self, spec, expected):
        assert parse_sweep(spec) == expected

    @pytest.mark.parametrize("spec", ["m", "m=a:b"])
    def test_parse_sweep_errors(self, spec):
        with pytest.raises(ValidationError):
            parse_sweep(spec)


class TestMain:
    def test_success_prints_report(self, capsys):
        assert main(['--mode', 'uniform', '--d', '3']) == EXIT_OK
        assert 'success_probability_final' in capsys.readouterr().out

    def test_missing_data(self):
        assert main(['--mode', 'inverse']) == EXIT_VALIDATION

    def test_malformed_data(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("3\nfive\n")
        assert main(['--mode', 'inverse', '--data', str(path)]) == EXIT_VALIDATION

    def test_unknown_flag(self):
        assert main(['--mode', 'uniform', '--d', '3', '--bogus']) == EXIT_VALIDATION

    def test_bad_round_count(self):
        assert main(['--mode', 'uniform', '--d', '3', '--aa', 'often']) == EXIT_VALIDATION

    def test_runtime_failure(self, monkeypatch):
        def fail(*args, **kwargs):
            raise SimulationError("injected")

        monkeypatch.setattr('cli.app.prepare_uniform', fail)
        assert main(['--mode', 'uniform', '--d', '3']) == EXIT_RUNTIME

    def test_config_file_with_override(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("mode: uniform\nd: 5\n")
        out = tmp_path / "report.yaml"
        assert main(['--config', str(config), '--d', '3', '--out', str(out)]) == EXIT_OK
        assert len(ReportFile.read(str(out)).report['post_selected_amplitudes']) == 3

    def test_config_file_unknown_key(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("mode: uniform\nd: 5\nspeed: fast\n")
        assert main(['--config', str(config)]) == EXIT_VALIDATION

    def test_sweep_to_csv(self, alphas_file, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(['--mode', 'inverse', '--data', alphas_file, '--sweep', 'm=2:4',
                     '--out', str(out)])
        assert code == EXIT_OK
        assert pd.read_csv(out)['m'].tolist() == [2, 3, 4]

    def test_config_file_with_exponent_epsilon(self, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text("mode: estimate\nepsilon: 1e-5\n")
        assert main(['--config', str(config)]) == EXIT_OK
        assert 'newton' in capsys.readouterr().out

    def test_malformed_expression(self, tmp_path):
        data = tmp_path / "values.csv"
        data.write_text("1\n2\n")
        g_table = tmp_path / "g.csv"
        g_table.write_text("".join(f"{k},{k + 1}\n" for k in range(4)))
        h_table = tmp_path / "h.csv"
        h_table.write_text("".join(f"{j},{j}/8\n" for j in range(8)))
        code = main(['--mode', 'general', '--data', str(data), '--n', '2', '--m', '3',
                     '--f-expr', '1/(', '--g-table', str(g_table), '--h-table', str(h_table)])
        assert code == EXIT_VALIDATION

    def test_unwritable_output(self, tmp_path):
        out = tmp_path / "missing" / "report.yaml"
        assert main(['--mode', 'uniform', '--d', '3', '--out', str(out)]) == EXIT_VALIDATION
        assert not out.exists()
