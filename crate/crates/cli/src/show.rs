use qmem_core::memory::{MemorySpec, TestParams};

/// `value` with an SI prefix chosen so the mantissa lies in [1, 1000).
pub fn si(value: f64, unit: &str) -> String {
    const PREFIXES: [(f64, &str); 7] = [
        (1e9, "G"),
        (1e6, "M"),
        (1e3, "k"),
        (1.0, ""),
        (1e-3, "m"),
        (1e-6, "μ"),
        (1e-9, "n"),
    ];
    if value == 0.0 || !value.is_finite() {
        return format!("{value} {unit}");
    }
    let (scale, prefix) = PREFIXES
        .iter()
        .copied()
        .find(|(s, _)| value.abs() >= *s)
        .unwrap_or((1e-12, "p"));
    format!("{} {prefix}{unit}", trimmed(value / scale))
}

/// Six significant digits without trailing zeros.
fn trimmed(x: f64) -> String {
    let digits = 5usize.saturating_sub(x.abs().log10().floor().max(0.0) as usize);
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn rows_to_text(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn polarizations<T: ToString>(p: &[T]) -> String {
    p.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

pub fn spec_table(spec: &MemorySpec) -> String {
    let bound = if spec.bandwidth_is_lower_bound { "> " } else { "" };
    let trans_note = if spec.eta_trans.is_some() { "" } else { " (derived)" };
    rows_to_text(&[
        ("class_name", spec.class_name.clone()),
        ("atomic_species", spec.atomic_species.clone()),
        ("wavelength", format!("{} nm", trimmed(spec.wavelength))),
        ("eta_e2e_0", trimmed(spec.eta_e2e_0)),
        ("eta_int_0", trimmed(spec.eta_int_0)),
        ("eta_trans", format!("{}{trans_note}", trimmed(spec.eta_trans()))),
        ("mu_1", format!("{}", spec.mu_1)),
        ("bandwidth", format!("{bound}{}", si(spec.bandwidth, "Hz"))),
        ("lifetime", si(spec.lifetime, "s")),
        ("retrigger_time", si(spec.retrigger_time, "s")),
        ("polarization", polarizations(&spec.polarization)),
        ("scheme", spec.scheme.to_string()),
        ("protocol", spec.protocol.clone()),
    ])
}

pub fn test_table(p: &TestParams) -> String {
    rows_to_text(&[
        ("class_name", "Test".into()),
        ("t_in", trimmed(p.t_in)),
        ("t_out", trimmed(p.t_out)),
        ("kappa_e", trimmed(p.kappa_e)),
        ("kappa_l", trimmed(p.kappa_l)),
        ("n_bar_b_e", format!("{}", p.n_bar_b_e)),
        ("n_bar_b_l", format!("{}", p.n_bar_b_l)),
        ("wavelength", format!("{} nm", trimmed(p.wavelength))),
        ("bandwidth", si(p.bandwidth, "Hz")),
        ("retrigger_time", si(p.retrigger_time, "s")),
        ("polarization", polarizations(&p.polarization)),
    ])
}
