//! Named scenarios that reproduce the published figures.

pub const NAMES: [&str; 4] = ["fig2", "fig3", "fig4a", "fig4b"];

/// Blue-sideband flopping at η_L = 0.202, Ω/2π = 475 kHz, n̄ = 1, Γ/g = 6e-3.
const SIDEBAND: &str = "\
mode = ajc
format = both
eta_l = 0.202
omega_hz = 475e3
gamma_over_g = 6.0e-3
nbar = 1.0
truncation = 4
t_max_s = 120e-6
dt_s = 5e-8
";

/// Config text for a preset, or `None` for an unknown name.
pub fn config(name: &str) -> Option<String> {
    let text = match name {
        "fig2" => "\
mode = carrier_grid
output = fig2
format = both
gamma = 1.0
nu = 6.283185307179586
nbar = 1.0
alpha_re = 2.0
alpha_im = 0.0
times_s = 0.2,0.9
"
        .to_string(),
        "fig3" => format!("output = fig3\n{SIDEBAND}n0 = 0\n"),
        "fig4a" => format!("output = fig4a\n{SIDEBAND}n0 = 0\nheuristic_gamma0 = 11.9e3\n"),
        "fig4b" => format!("output = fig4b\n{SIDEBAND}n0 = 1\nheuristic_gamma0 = 11.9e3\n"),
        _ => return None,
    };
    Some(text)
}
