use serde_json::{json, Value};
use timecoord::analysis::{certify, feasibility_margins, h_max, CertifyOptions, HMax};
use timecoord::graph::SpectralDecomposition;
use timecoord::sim::scenario::DisturbanceSpec;
use timecoord::solver::GainPair;

use crate::error::CliError;
use crate::{load, CertifyArgs};

pub fn execute(args: &CertifyArgs) -> Result<(), CliError> {
    let scenario = load(&args.input)?;
    let cfg = scenario.mpc_config()?;
    let topology = scenario.topology()?;
    let spectral =
        SpectralDecomposition::<f64>::new(&topology).map_err(|e| CliError::Domain(format!("topology: {e}")))?;
    let h = cfg.step;
    let gains = GainPair::new(&cfg.weights, h).map_err(|e| CliError::Domain(e.to_string()))?;
    let nu = args.nu.unwrap_or(match scenario.disturbance {
        DisturbanceSpec::Synthetic { nu, .. } | DisturbanceSpec::KinematicTracker { nu, .. } => nu,
        DisturbanceSpec::None => 1.0,
    });
    let d = args.d.unwrap_or(match scenario.disturbance {
        DisturbanceSpec::Synthetic { d, .. } => d,
        _ => 0.0,
    });
    let opts = CertifyOptions {
        margin: args.margin,
        ..CertifyOptions::default()
    };
    let cert = certify(&spectral, &gains, h, nu, &opts).map_err(|e| CliError::Domain(e.to_string()))?;
    let rho: Vec<f64> = cert.modes.iter().map(|m| m.rho).collect();

    if cfg.horizon != 1 {
        eprintln!(
            "warning: horizon K={} has no convergence certificate; reporting the spectral radii of the horizon-one law only",
            cfg.horizon
        );
        let doc = json!({
            "horizon": cfg.horizon,
            "step": h,
            "eigenvalues": spectral.eigenvalues,
            "rho": rho,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        return Ok(());
    }

    let hmax =
        h_max(&spectral.eigenvalues, &cfg.weights, 1e-6, args.h_cap).map_err(|e| CliError::Domain(e.to_string()))?;
    let hmax_json = match hmax {
        HMax::Bounded { h } => json!({"bounded": true, "value": h}),
        HMax::Unbounded { cap } => json!({"bounded": false, "value": cap}),
    };

    let gamma0 = scenario.initial_gamma();
    let rate0 = scenario.initial_rate();
    let init_norm = gamma0
        .iter()
        .zip(&rate0)
        .map(|(g, r)| (g + h * (r - 1.0)).abs().max((r - 1.0).abs()))
        .fold(0.0, f64::max);
    let margins: Value = if cert.valid {
        let bounds = vec![cfg.gamma_bounds; scenario.n_agents];
        let m = feasibility_margins(&cert, &bounds, d, init_norm).map_err(|e| CliError::Domain(e.to_string()))?;
        json!({
            "valid": m.valid,
            "diagnostic": m.diagnostic,
            "d": d,
            "init_norm": init_norm,
            "A1": m.a1,
            "A2": m.a2,
            "S1": m.s1,
            "S2": m.s2,
            "input_rhs": m.input_rhs,
            "rate_rhs": m.rate_rhs,
            "input_margin": m.input_margin,
            "rate_margin": m.rate_margin,
            "init_intercept": m.init_intercept,
            "disturbance_intercept": m.disturbance_intercept,
            "nu_h": m.init_radius,
            "d_h": m.disturbance_bound,
            "constraint_free": m.valid && m.input_margin.iter().chain(&m.rate_margin).all(|&x| x > 0.0),
        })
    } else {
        json!({"valid": false, "diagnostic": "no margins without a valid certificate"})
    };

    let z = &cert.zero_mode;
    let doc = json!({
        "valid": cert.valid,
        "diagnostic": cert.diagnostic(),
        "unstable_eigenvalues": cert.unstable,
        "step": h,
        "nu": nu,
        "gains": {"a": gains.a, "b": gains.b},
        "eigenvalues": spectral.eigenvalues,
        "rho": rho,
        "r_h": cert.rate,
        "gelfand": cert.modes.iter().map(|m| m.gelfand).collect::<Vec<_>>(),
        "C_inf": cert.gelfand_max,
        "zero_mode": {
            "q": z.q,
            "P": [[z.p[(0, 0)], z.p[(0, 1)]], [z.p[(1, 0)], z.p[(1, 1)]]],
            "F": [[z.f[(0, 0)], z.f[(0, 1)]], [z.f[(1, 0)], z.f[(1, 1)]]],
        },
        "h_max": hmax_json,
        "margins": margins,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    Ok(())
}
