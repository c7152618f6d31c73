#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Testes da linha de comando e do manipulador de operações.
"""

import csv
import json
from unittest.mock import patch

import numpy as np
import pytest

from src.bench import BenchRecord, BenchReport
from src.cli import EXIT_INPUT, EXIT_OK, EXIT_RUNTIME, main
from src.core import ModelState
from src.exceptions import InputError
from src.handlers.mbcr_handler import MbcrHandler
from src.predict import posterior_mean_batch
from src.sampler import PosteriorSamples
from src.serialization import read_model, write_model
from src.validation import read_dataset
from utils.helpers import write_csv_rows


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as file:
        return list(csv.DictReader(file))


@pytest.fixture
def data_csv(tmp_path):
    """CSV x1,y com 40 pontos de |x| + ruído."""
    generator = np.random.default_rng(8)
    x = generator.uniform(-1, 1, 40)
    y = np.abs(x) + 0.1 * generator.standard_normal(40)
    path = tmp_path / "dados.csv"
    lines = ["x1,y"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(x, y)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def config_json(tmp_path):
    """Configuração com cadeia curta."""
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"chain": {"iterations": 60, "burn_in": 30}}), encoding="utf-8")
    return str(path)


@pytest.fixture
def model_json(tmp_path, data_csv, config_json):
    """Modelo ajustado pela própria linha de comando."""
    path = str(tmp_path / "modelo.json")
    assert main(["fit", data_csv, "--out", path, "--config", config_json, "--seed", "1"]) == EXIT_OK
    return path


def _write_states(tmp_path, name, states):
    path = str(tmp_path / name)
    write_model(path, PosteriorSamples(tuple(states)))
    return path


class TestFit:
    """Testes do subcomando fit."""

    def test_writes_model(self, capsys, model_json):
        """Arquivo com dim, draws, diagnostics e config."""
        with open(model_json, encoding="utf-8") as file:
            data = json.load(file)
        assert data["dim"] == 1
        assert len(data["draws"]) == 30
        assert data["config"]["chain"]["seed"] == 1
        assert "acceptance_rate_by_kind" in data["diagnostics"]
        assert "estados retidos: 30" in capsys.readouterr().out

    def test_byte_identical_runs(self, tmp_path, data_csv, config_json):
        """Mesma entrada e semente, arquivos idênticos byte a byte."""
        first, second = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        assert main(["fit", data_csv, "--out", first, "--config", config_json, "--seed", "9"]) == EXIT_OK
        assert main(["fit", data_csv, "--out", second, "--config", config_json, "--seed", "9"]) == EXIT_OK
        with open(first, "rb") as a, open(second, "rb") as b:
            assert a.read() == b.read()

    def test_missing_y_column(self, tmp_path, capsys):
        """CSV sem y: código 1 e mensagem citando a coluna."""
        path = tmp_path / "sem_y.csv"
        path.write_text("x1,x2\n0,1\n", encoding="utf-8")
        assert main(["fit", str(path), "--out", str(tmp_path / "m.json")]) == EXIT_INPUT
        assert "'y'" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        """Arquivo inexistente é erro de entrada."""
        assert main(["fit", str(tmp_path / "nada.csv"), "--out", str(tmp_path / "m.json")]) == EXIT_INPUT

    def test_invalid_seed(self, data_csv, tmp_path):
        """Semente negativa é rejeitada pelo parser."""
        assert main(["fit", data_csv, "--out", str(tmp_path / "m.json"), "--seed", "-3"]) == EXIT_INPUT

    def test_runtime_failure(self, data_csv, tmp_path):
        """Erro inesperado durante o ajuste devolve código 2."""
        with patch("src.handlers.mbcr_handler.run_chain", side_effect=RuntimeError("falhou")):
            assert main(["fit", data_csv, "--out", str(tmp_path / "m.json")]) == EXIT_RUNTIME

    def test_data_file_is_readable(self, data_csv):
        """O CSV de entrada tem apenas números simples e é lido por inteiro."""
        dataset = read_dataset(data_csv)
        assert dataset.n == 40
        assert dataset.p == 1


class TestPredict:
    """Testes do subcomando predict."""

    def test_grid(self, model_json, tmp_path):
        """21 linhas com mean igual à média calculada em processo."""
        out = str(tmp_path / "prev.csv")
        assert main(["predict", model_json, "--grid", "x1=-1:1:21", "--out", out]) == EXIT_OK
        rows = _read_csv(out)
        assert len(rows) == 21
        assert list(rows[0]) == ["x1", "mean", "lo", "hi"]

        samples, _ = read_model(model_json)
        X = np.array([[float(row["x1"])] for row in rows])
        expected = posterior_mean_batch(samples, X)
        np.testing.assert_allclose([float(row["mean"]) for row in rows], expected, rtol=0, atol=1e-12)
        assert all(float(row["lo"]) <= float(row["hi"]) for row in rows)

    def test_query_file(self, model_json, tmp_path):
        """Arquivo de consulta x1."""
        queries = tmp_path / "consulta.csv"
        queries.write_text("x1\n0.0\n0.5\n", encoding="utf-8")
        out = str(tmp_path / "prev.csv")
        assert main(["predict", model_json, str(queries), "--out", out, "--level", "0.5"]) == EXIT_OK
        assert len(_read_csv(out)) == 2

    def test_dimension_mismatch(self, model_json, tmp_path):
        """Consulta com duas covariáveis contra modelo p = 1."""
        queries = tmp_path / "consulta.csv"
        queries.write_text("x1,x2\n0.0,1.0\n", encoding="utf-8")
        assert main(["predict", model_json, str(queries), "--out", str(tmp_path / "p.csv")]) == EXIT_INPUT

    def test_invalid_level(self, model_json, tmp_path):
        """--level fora de (0, 1)."""
        args = ["predict", model_json, "--grid", "x1=0:1:3", "--level", "1.5", "--out", str(tmp_path / "p.csv")]
        assert main(args) == EXIT_INPUT

    def test_too_few_draws(self, tmp_path, v_state):
        """Bandas exigem ao menos 10 estados."""
        model = _write_states(tmp_path, "pequeno.json", [v_state] * 5)
        args = ["predict", model, "--grid", "x1=0:1:3", "--out", str(tmp_path / "p.csv")]
        assert main(args) == EXIT_INPUT

    def test_requires_queries(self, model_json, tmp_path):
        """Sem arquivo nem grade é erro de entrada."""
        assert main(["predict", model_json, "--out", str(tmp_path / "p.csv")]) == EXIT_INPUT


class TestMinimize:
    """Testes do subcomando minimize."""

    def test_single_plane_corner(self, tmp_path, capsys):
        """Plano y = x minimizado no canto x = -1."""
        model = _write_states(tmp_path, "reta.json", [ModelState.from_arrays([0.0], [[1.0]], [1.0])])
        out = tmp_path / "min.json"
        assert main(["minimize", model, "--box=-1:1", "--out", str(out)]) == EXIT_OK
        result = json.loads(out.read_text(encoding="utf-8"))
        assert result["x_star"] == pytest.approx([-1.0])
        assert result["value"] == pytest.approx(-1.0)
        assert "x_star" in capsys.readouterr().out

    def test_abs_model(self, tmp_path, v_state):
        """|x| tem mínimo em 0."""
        model = _write_states(tmp_path, "abs.json", [v_state])
        out = tmp_path / "min.json"
        assert main(["minimize", model, "--box=-1:1", "--out", str(out)]) == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["x_star"][0] == pytest.approx(0.0, abs=1e-12)

    def test_value_uses_every_draw(self, tmp_path):
        """value é a média a posteriori em x_star sobre todos os estados, mesmo com o LP em subconjunto."""
        offsets = (np.arange(150) / 150.0) ** 2
        states = [ModelState.from_arrays([c], [[1.0]], [1.0]) for c in offsets]
        model = _write_states(tmp_path, "muitos.json", states)
        out = tmp_path / "min.json"
        assert main(["minimize", model, "--box=-1:1", "--out", str(out)]) == EXIT_OK
        result = json.loads(out.read_text(encoding="utf-8"))
        assert result["x_star"] == pytest.approx([-1.0])
        assert result["value"] == pytest.approx(offsets.mean() - 1.0, abs=1e-12)

    @pytest.mark.parametrize("box", ["--box=1:-1", "--box=0:0", "--box=-1:1,-1:1"])
    def test_malformed_box(self, tmp_path, v_state, box):
        """Caixa malformada ou de dimensão errada: código 1."""
        model = _write_states(tmp_path, "abs.json", [v_state])
        assert main(["minimize", model, box]) == EXIT_INPUT


class TestBench:
    """Testes do subcomando bench."""

    def test_truth_in_test_mode(self, tmp_path):
        """Pseudo-método truth: três linhas de MSE zero e o resumo."""
        out = str(tmp_path / "bench.csv")
        args = ["--test-mode", "bench", "--problem", "p2", "--n", "20", "--seeds", "0,1,2",
                "--methods", "truth", "--test-n", "100", "--out", out]
        assert main(args) == EXIT_OK
        rows = _read_csv(out)
        assert list(rows[0]) == ["problem", "method", "n", "seed", "mse", "standard_error"]
        assert [row["seed"] for row in rows] == ["0", "1", "2", "mean"]
        assert all(float(row["mse"]) == 0.0 for row in rows)

    def test_truth_hidden_without_test_mode(self, tmp_path):
        """truth não é aceito fora do modo de teste."""
        args = ["bench", "--problem", "p2", "--methods", "truth", "--out", str(tmp_path / "b.csv")]
        assert main(args) == EXIT_INPUT

    def test_unknown_problem(self, tmp_path):
        """Problema fora da lista é rejeitado pelo parser."""
        assert main(["bench", "--problem", "p9", "--out", str(tmp_path / "b.csv")]) == EXIT_INPUT

    def test_partial_failures(self, tmp_path, capsys):
        """Falhas de ajuste gravam resultados parciais e devolvem código 2."""
        report = BenchReport(
            records=[BenchRecord("p2", "lse", 20, 0, 0.5)],
            failures=[{"problem": "p2", "method": "mbcr", "n": 20, "seed": 0, "error": "falhou"}],
        )
        out = str(tmp_path / "bench.csv")
        with patch("src.handlers.mbcr_handler.run_benchmark", return_value=report):
            assert main(["bench", "--problem", "p2", "--n", "20", "--out", out]) == EXIT_RUNTIME
        assert len(_read_csv(out)) == 2
        assert "falharam" in capsys.readouterr().err


class TestStability:
    """Testes do subcomando stability."""

    def test_truth_in_test_mode(self, tmp_path):
        """Minimizadores em (0, 0) e resumo ao lado do CSV."""
        out = tmp_path / "estabilidade.csv"
        args = ["--test-mode", "stability", "--resamples", "2", "--n", "20", "--methods", "truth", "--out", str(out)]
        assert main(args) == EXIT_OK
        rows = _read_csv(out)
        assert len(rows) == 2
        assert all(float(row["x1"]) == 0.0 and float(row["x2"]) == 0.0 for row in rows)
        summary = json.loads((tmp_path / "estabilidade_summary.json").read_text(encoding="utf-8"))
        assert summary["mean_distance"] == {"truth": 0.0}

    def test_single_resample(self, tmp_path):
        """Uma reamostragem viola o contrato: código 1."""
        args = ["--test-mode", "stability", "--resamples", "1", "--methods", "truth", "--out", str(tmp_path / "e.csv")]
        assert main(args) == EXIT_INPUT


class TestCsvOutput:
    """Testes da escrita de CSV."""

    def test_numpy_floats_are_plain_numbers(self, tmp_path):
        """np.float64 é gravado como número simples."""
        path = str(tmp_path / "saida.csv")
        write_csv_rows(path, ["a", "b"], [[np.float64(0.1), 3]])
        assert _read_csv(path) == [{"a": "0.1", "b": "3"}]


class TestParser:
    """Testes do parser."""

    def test_help(self, capsys):
        """--help devolve 0."""
        assert main(["--help"]) == EXIT_OK
        assert "fit" in capsys.readouterr().out

    def test_missing_command(self):
        """Sem subcomando é erro de entrada."""
        assert main([]) == EXIT_INPUT


class TestMbcrHandler:
    """Testes do manipulador."""

    def test_unsupported_operation(self):
        """Operação desconhecida gera InputError."""
        with pytest.raises(InputError):
            MbcrHandler().handle("plot", {})

    def test_test_mode_flag(self):
        """O modo de teste vem do contexto."""
        handler = MbcrHandler()
        assert handler._is_test_mode({"test_mode": True})
        assert not handler._is_test_mode(None)
