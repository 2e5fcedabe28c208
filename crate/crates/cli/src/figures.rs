//! Named parameter presets (`--paper-defaults fig1` … `fig9`): each one
//! pins the exact parameters of a reference figure so the corresponding
//! curve, table, or grid can be reproduced with a single command.

use trapctl_core::protocol::{
    design_delta_sta, design_dkc_free, design_dkc_inverted, design_finite_dkc_inverted,
    ProtocolSpec,
};

use crate::CliError;

/// Which table a `table` preset produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// Exact vs long-time kick strength over the TOF kick time.
    KickStrengthVsTime,
    /// Quasi-adiabatic/DKC time-gain ratio over N = ω₀/ω_F.
    GainRatioVsN,
    /// Finite-pulse vs δ-kick pulse parameters over ω_k, free flight.
    FinitePulseFree,
    /// Finite-pulse vs δ-kick pulse parameters over ω_k, inverted trap.
    FinitePulseInverted,
}

/// What a figure id stands for.
#[derive(Debug, Clone)]
pub enum Preset {
    /// Wigner snapshots of a protocol from a thermal state.
    Wigner { spec: ProtocolSpec, beta0: f64 },
    /// Trajectory of a protocol (b, ḃ, ω², α over time).
    Simulate { spec: ProtocolSpec },
    /// Comparison table over a swept parameter.
    Table {
        kind: TableKind,
        from: f64,
        to: f64,
        points: usize,
        log_spaced: bool,
        omega_f: f64,
        omega_i: Option<f64>,
    },
}

/// Resolve a figure id at reference frequency `omega0`.
pub fn preset(id: &str, omega0: f64) -> Result<Preset, CliError> {
    let input = |e: trapctl_core::protocol::ProtocolError| CliError::Input(e.to_string());
    match id {
        // Thermal state β₀ = 1/ω₀, free flight to t_k = 3/(2ω₀), exact
        // kick: b_F = √(1 + (3/2)²) = √3.25.
        "fig1" => Ok(Preset::Wigner {
            spec: design_dkc_free(3.25f64.sqrt(), omega0).map_err(input)?,
            beta0: 1.0 / omega0,
        }),
        // Exact vs long-time kick strength for t_k ∈ [0.1, 10]/ω₀.
        "fig2" => Ok(Preset::Table {
            kind: TableKind::KickStrengthVsTime,
            from: 0.1 / omega0,
            to: 10.0 / omega0,
            points: 100,
            log_spaced: true,
            omega_f: 0.5 * omega0,
            omega_i: None,
        }),
        // DKC after free expansion with ω_F = ω₀/2 (b_F = √2).
        "fig3" => Ok(Preset::Simulate {
            spec: design_dkc_free(2.0f64.sqrt(), omega0).map_err(input)?,
        }),
        // Kick-assisted shortcut, n = 2 (no initial quench), b_F = 2.
        "fig4" => Ok(Preset::Simulate {
            spec: design_delta_sta(omega0, omega0 / 4.0, 2.0 / omega0, 2).map_err(input)?,
        }),
        // Time-gain ratio over N with the 8.03 minimum near N = 4.29.
        "fig5" => Ok(Preset::Table {
            kind: TableKind::GainRatioVsN,
            from: 1.05,
            to: 100.0,
            points: 400,
            log_spaced: true,
            omega_f: 0.5 * omega0,
            omega_i: None,
        }),
        // Trap-inversion DKC with a finite pulse: ω_I = 4ω₀,
        // ω_k² = 200ω₀², ω_F = ω₀/2.
        "fig6" => Ok(Preset::Simulate {
            spec: design_finite_dkc_inverted(
                omega0,
                0.5 * omega0,
                4.0 * omega0,
                200.0f64.sqrt() * omega0,
            )
            .map_err(input)?,
        }),
        // Inverted-trap Wigner snapshots, same expansion time as fig1:
        // ω_I = ω₀, t_F = 3/(2ω₀) ⇒ b_F = √(1 + 2 sinh²(3/2)).
        "fig7" => Ok(Preset::Wigner {
            spec: design_dkc_inverted(
                (1.0 + 2.0 * (1.5f64).sinh().powi(2)).sqrt(),
                omega0,
                omega0,
            )
            .map_err(input)?,
            beta0: 1.0 / omega0,
        }),
        // Finite pulse vs δ-kick, free flight, ω_F = ω₀/2.
        "fig8" => Ok(Preset::Table {
            kind: TableKind::FinitePulseFree,
            from: 1.0 * omega0,
            to: 20.0 * omega0,
            points: 80,
            log_spaced: false,
            omega_f: 0.5 * omega0,
            omega_i: None,
        }),
        // Finite pulse vs δ-kick with trap inversion,
        // ω_F = ω_I/4 = ω₀/2.
        "fig9" => Ok(Preset::Table {
            kind: TableKind::FinitePulseInverted,
            from: 1.0 * omega0,
            to: 20.0 * omega0,
            points: 80,
            log_spaced: false,
            omega_f: 0.5 * omega0,
            omega_i: Some(2.0 * omega0),
        }),
        other => Err(CliError::Input(format!(
            "unknown figure id `{other}` (expected fig1..fig9)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_figure_ids_resolve() {
        for id in ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"] {
            assert!(preset(id, 1.0).is_ok(), "{id}");
        }
        assert!(preset("fig10", 1.0).is_err());
    }

    #[test]
    fn fig1_expansion_time_is_three_halves() {
        let Preset::Wigner { spec, beta0 } = preset("fig1", 1.0).unwrap() else {
            panic!("fig1 should be a wigner preset");
        };
        assert!((spec.design_params["t_k"] - 1.5).abs() < 1e-12);
        assert_eq!(beta0, 1.0);
    }

    #[test]
    fn fig7_reproduces_the_same_expansion_time() {
        let Preset::Wigner { spec, .. } = preset("fig7", 1.0).unwrap() else {
            panic!("fig7 should be a wigner preset");
        };
        assert!((spec.design_params["t_k"] - 1.5).abs() < 1e-12);
        assert!((spec.design_params["omega_I"] - 1.0).abs() < 1e-15);
    }
}
