/// `(name, description, JSON)` for every shipped preset.
pub const PRESETS: &[(&str, &str, &str)] = &[
    (
        "fig2_nominal",
        "pitch-rate doublet, INDI with mapped PI companion, rate noise",
        include_str!("../../presets/fig2_nominal.json"),
    ),
    (
        "fig2_actuator_lag",
        "fig2_nominal with a first-order actuator, tau_a = 0.01 s, in the loop",
        include_str!("../../presets/fig2_actuator_lag.json"),
    ),
    (
        "ndi_baseline",
        "continuous NDI on the exact model, step reference, no noise or actuator",
        include_str!("../../presets/ndi_baseline.json"),
    ),
    (
        "mismatch_study",
        "fig2_nominal with the truth plant drift scaled by 1.3",
        include_str!("../../presets/mismatch_study.json"),
    ),
    (
        "tde_sweep",
        "noise-free fig2_nominal, base for sample-period sweeps",
        include_str!("../../presets/tde_sweep.json"),
    ),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.2)
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}
