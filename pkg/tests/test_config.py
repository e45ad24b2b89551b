import pytest
from hypothesis import given, strategies as st

from nilcorr.config import ConfigError, parse_config, render, typed

MINIMAL = """
system.torus T { dim = 1; rank = 1; angles = [[sqrt(2)/2]] }
obs.char f0 { freq = [1] }
obs.char f1 { freq = [-1] }
poly q { coords = ["sqrt(2)*x"] }
correlation C { system = T; functions = [f0, f1]; polys = [q] }
experiment.correlate { correlation = C }
"""


def errors_of(text):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    return info.value.errors


class TestParse:
    def test_minimal_defaults(self):
        cfg = parse_config(MINIMAL)
        corr = cfg.find("correlation", "C")
        assert typed(corr, "Q") == 4096 and typed(corr, "integration") == "auto"
        assert typed(cfg.experiment, "range") == (1, 101)
        assert typed(cfg.find("obs.char", "f0"), "amp") == 1

    def test_comments_and_separators(self):
        text = MINIMAL.replace("experiment.correlate { correlation = C }",
                               "# a comment\nexperiment.correlate {\n  correlation = C, range = 5:9  # trailing\n}")
        assert typed(parse_config(text).experiment, "range") == (5, 9)

    def test_delta_out_of_range_has_line(self):
        text = 'poly q { coords = ["x"] }\nexperiment.suspend {\n  correlation = C\n  delta = 1.5\n}\n'
        errs = errors_of(MINIMAL.replace("experiment.correlate { correlation = C }", "") + text)
        assert any("delta outside (0,1)" in msg for _, msg in errs)
        line = [ln for ln, msg in errs if "delta outside" in msg][0]
        assert (MINIMAL.replace("experiment.correlate { correlation = C }", "") + text).splitlines()[line - 1].strip() == "delta = 1.5"

    def test_duplicate_definition(self):
        errs = errors_of(MINIMAL + 'poly q { coords = ["x"] }\n')
        assert any("duplicate definition" in msg for _, msg in errs)

    def test_unknown_key(self):
        errs = errors_of(MINIMAL.replace("freq = [1] }", "freq = [1]; frq = 2 }"))
        assert any("unknown key frq" in msg for _, msg in errs)

    def test_unknown_kind(self):
        assert any("unknown block kind" in m for _, m in errors_of(MINIMAL + "system.sphere S { }"))

    def test_unresolved_reference(self):
        errs = errors_of(MINIMAL.replace("polys = [q]", "polys = [r]"))
        assert any("unresolved reference r" in msg for _, msg in errs)

    def test_all_errors_reported(self):
        text = MINIMAL.replace("freq = [1] }", "freq = [1]; bogus = 1 }").replace("polys = [q]", "polys = [zz]")
        assert len(errors_of(text)) == 2

    def test_syntax_error(self):
        errs = errors_of("poly q { coords = [\"x\" }")
        assert errs and errs[0][0] == 1

    def test_invalid_range(self):
        assert any("empty range" in m for _, m in errors_of(MINIMAL.replace("correlation = C }", "correlation = C; range = 9:3 }")))

    def test_schemes_exclusive(self):
        text = MINIMAL.replace("experiment.correlate { correlation = C }",
                               "experiment.average { correlation = C; cesaro = 1:10; primes = 100 }")
        assert any("exactly one" in m for _, m in errors_of(text))

    def test_angle_table_shape(self):
        errs = errors_of(MINIMAL.replace("angles = [[sqrt(2)/2]]", "angles = [[sqrt(2)/2, 1/3]]"))
        assert any("rank x dim" in m for _, m in errs)

    def test_bad_polynomial(self):
        assert errors_of(MINIMAL.replace('"sqrt(2)*x"', '"sqrt(2)*y"'))

    def test_delta_grid_descending(self):
        text = 'poly q { coords = ["x"] }\nexperiment.equidist { poly = q; delta = [0.1, 0.2]; range = 1:10 }'
        assert any("descending" in m for _, m in errors_of(text))


# --- round trip -------------------------------------------------------------

names = st.sampled_from(["a", "b2", "long_name", "x-y"])
coefs = st.sampled_from(["sqrt(2)/2", "1/3", "pi", "-2", "0.25", "3*pi/4", "sqrt(2) + 1/3"])
poly_lits = st.sampled_from(["x", "sqrt(2)*x^2 + 1/3*x", "x/3 + 1/7", "pi*x", "0.5*x^3"])


@st.composite
def configs(draw):
    dim = draw(st.integers(1, 2))
    rank = draw(st.integers(1, 2))
    angles = [[draw(coefs) for _ in range(dim)] for _ in range(rank)]
    obs = draw(st.lists(names, min_size=1, max_size=3, unique=True))
    lines = [f"system.torus S {{ dim = {dim}; rank = {rank}; "
             f"angles = [{', '.join('[' + ', '.join(r) + ']' for r in angles)}] }}"]
    for o in obs:
        freq = ", ".join(str(draw(st.integers(-3, 3))) for _ in range(dim))
        amp = draw(st.sampled_from(["1", "2", "0.5-1i", "1i"]))
        lines.append(f"obs.char {o} {{ freq = [{freq}]; amp = {amp} }}")
    m = draw(st.integers(1, 2))
    coords = ", ".join(f'"{draw(poly_lits)}"' for _ in range(rank))
    lines.append(f"poly p {{ coords = [{coords}] }}")
    fs = ", ".join(draw(st.sampled_from(obs)) for _ in range(m + 1))
    extra = draw(st.sampled_from(["", "; integration = quadrature; Q = 64", "; brackets = [ceil]"]))
    if "brackets" in extra:
        extra = "; brackets = [" + ", ".join(["ceil"] * m) + "]"
    lines.append(f"correlation C {{ system = S; functions = [{fs}]; polys = [{', '.join(['p'] * m)}]{extra} }}")
    kind = draw(st.sampled_from(["correlate", "average-cesaro", "average-primes", "suspend"]))
    if kind == "correlate":
        lines.append(f"experiment.correlate {{ correlation = C; range = {draw(st.integers(0, 50))}:60 }}")
    elif kind == "average-cesaro":
        lines.append("experiment.average { correlation = C; cesaro = 1:1000 }")
    elif kind == "average-primes":
        lines.append(f"experiment.average {{ correlation = C; primes = 1000; ap = {draw(st.integers(1, 4))}:1 }}")
    else:
        lines.append(f"experiment.suspend {{ correlation = C; delta = {draw(st.sampled_from(['0.1', '0.25', '1/3']))} }}")
    if draw(st.booleans()):
        out_dir = draw(st.sampled_from(["out", "a b/c", 'q\\"uote']))
        lines.append('output { dir = "' + out_dir + '" }')
    return "\n".join(lines)


@given(configs())
def test_round_trip(text):
    cfg = parse_config(text)
    again = parse_config(render(cfg))
    assert again == cfg
    assert render(again) == render(cfg)
