//! One function per subcommand: run the experiment, fill the table.

use mvoac::cs::{build_cs, pmepr_db};
use mvoac::experiment::{
    self, CerExperimentConfig, Lemma1Config, PmeprExperimentConfig, VoteDistribution,
};
use mvoac::guidance::{run_mission, GuidanceConfig};
use mvoac::rng::substream;
use mvoac::{Encoder, EncoderConfig, Permutation, VoteCensus, VoteVector};
use rand::Rng;

use crate::config::{CerSpec, ExperimentSpec, GenSpec, Lemma1Spec, PmeprSpec, Settings, UavSpec};
use crate::error::CliResult;
use crate::output::{
    fmt_digits, fmt_sig, Table, CER_HEADER, GEN_HEADER, LEMMA1_HEADER, PMEPR_HEADER, UAV_HEADER,
};

pub fn run(spec: &ExperimentSpec) -> CliResult<Table> {
    match &spec.settings {
        Settings::Gen(s) => gen(spec, s),
        Settings::Pmepr(s) => pmepr(spec, s),
        Settings::Cer(s) => cer(spec, s),
        Settings::Lemma1(s) => lemma1(spec, s),
        Settings::Uav(s) => uav(spec, s),
    }
}

fn gen(spec: &ExperimentSpec, s: &GenSpec) -> CliResult<Table> {
    let encoder = Encoder::<f64>::new(EncoderConfig::new(
        Permutation::new(s.pi.clone())?,
        s.h,
        s.alpha,
        false,
    )?);
    let votes = VoteVector::from_ints(&s.votes)?;
    let (b, c) = if s.random_phases {
        let mut rng = substream(spec.seed, 0);
        let c = rng.random_range(0..s.h);
        let b = (0..s.m).map(|_| rng.random_range(0..s.h)).collect();
        (b, c)
    } else {
        (s.b.clone(), s.c)
    };
    let params = encoder.params_for(&votes, b.clone(), c)?;
    let seq = build_cs(&params);
    let mut t = Table::new(spec, GEN_HEADER)?;
    t.meta("votes", &votes);
    t.meta("b", format!("{b:?}"));
    t.meta("c", c);
    t.meta("energy", fmt_sig(seq.energy()));
    t.meta("pmepr_db", fmt_sig(pmepr_db(&seq, s.oversample)?));
    for (i, e) in seq.elements().iter().enumerate() {
        t.row([i.to_string(), fmt_digits(e.re, s.digits), fmt_digits(e.im, s.digits)])?;
    }
    Ok(t)
}

fn pmepr(spec: &ExperimentSpec, s: &PmeprSpec) -> CliResult<Table> {
    let dist = experiment::run_pmepr_experiment(&PmeprExperimentConfig {
        k: s.k,
        m: s.m,
        p: s.p,
        z: s.z,
        alpha: s.alpha,
        h: s.h,
        samples: s.samples,
        oversample: s.oversample,
        seed: spec.seed,
        workers: s.workers,
    })?;
    let q = VoteDistribution::new(s.p, s.z)?.q();
    let mut t = Table::new(spec, PMEPR_HEADER)?;
    t.meta("max_pmepr_db", fmt_sig(dist.max()));
    t.meta("fraction_below_0.1_db", fmt_sig(dist.fraction_below(0.1)));
    let upper = (dist.max().max(3.0) / s.ccdf_step).ceil() * s.ccdf_step + s.ccdf_step;
    for (x, ccdf) in dist.ccdf_table(s.ccdf_step, upper) {
        t.row([
            "pmepr".to_string(),
            s.m.to_string(),
            s.k.to_string(),
            fmt_sig(s.p),
            fmt_sig(q),
            fmt_sig(s.z),
            s.alpha.to_string(),
            s.samples.to_string(),
            fmt_sig(x),
            fmt_sig(ccdf),
        ])?;
    }
    Ok(t)
}

pub fn cer_config(spec: &ExperimentSpec, s: &CerSpec) -> CerExperimentConfig {
    CerExperimentConfig {
        k: s.k,
        m_list: s.m_list.clone(),
        p_sweep: s.p_sweep.clone(),
        z: s.z,
        channels: s.channels.clone(),
        snr_db: s.snr_db,
        alpha: s.alpha,
        h: s.h,
        trials: s.trials,
        seed: spec.seed,
        workers: s.workers,
    }
}

fn cer(spec: &ExperimentSpec, s: &CerSpec) -> CliResult<Table> {
    let result = experiment::run_cer_experiment::<f64>(&cer_config(spec, s))?;
    let mut t = Table::new(spec, CER_HEADER)?;
    for r in &result.rows {
        t.row([
            "cer".to_string(),
            r.channel.name().to_string(),
            r.m.to_string(),
            r.k.to_string(),
            fmt_sig(r.p),
            fmt_sig(r.q),
            fmt_sig(r.z),
            r.alpha.to_string(),
            fmt_sig(r.snr_db),
            r.trials.to_string(),
            fmt_sig(r.cer),
            fmt_sig(r.ci_low),
            fmt_sig(r.ci_high),
        ])?;
    }
    Ok(t)
}

fn lemma1(spec: &ExperimentSpec, s: &Lemma1Spec) -> CliResult<Table> {
    let census = VoteCensus::new(s.k_plus, s.k_minus, s.k_zero);
    let mut cfg = Lemma1Config::new(census, s.alpha, s.sigma2, s.m, s.trials, spec.seed);
    cfg.index = s.index;
    cfg.channel = s.channel;
    cfg.h = s.h;
    cfg.workers = s.workers;
    let report = experiment::validate_lemma1(&cfg)?;
    let mut t = Table::new(spec, LEMMA1_HEADER)?;
    t.meta("pass", report.passes());
    let metrics = [
        ("plus", report.expected.m_plus, report.mean.m_plus, report.std_err.m_plus, report.z_score.m_plus),
        ("minus", report.expected.m_minus, report.mean.m_minus, report.std_err.m_minus, report.z_score.m_minus),
    ];
    for (name, expected, mean, se, z) in metrics {
        t.row([
            "lemma1".to_string(),
            s.channel.name().to_string(),
            s.m.to_string(),
            s.index.to_string(),
            s.k_plus.to_string(),
            s.k_minus.to_string(),
            s.k_zero.to_string(),
            s.alpha.to_string(),
            fmt_sig(s.sigma2),
            s.trials.to_string(),
            name.to_string(),
            fmt_sig(expected),
            fmt_sig(mean),
            fmt_sig(se),
            fmt_sig(z),
        ])?;
    }
    Ok(t)
}

pub fn guidance_config(s: &UavSpec) -> GuidanceConfig<f64> {
    GuidanceConfig {
        t_update: s.t_update,
        mu: s.mu,
        u_limit: s.u_limit,
        sigma_sensor2: s.sigma_sensor2,
        k: s.k,
        snr_db: s.snr_db,
        m: s.m,
        channel: s.channel,
        strategy: s.strategy,
        waypoint_epsilon: s.waypoint_epsilon,
        max_rounds: s.max_rounds,
        alpha: s.alpha,
        h: s.h,
        phase_randomization: s.phase_randomization,
    }
}

fn uav(spec: &ExperimentSpec, s: &UavSpec) -> CliResult<Table> {
    let cfg = guidance_config(s);
    let log = run_mission(&s.waypoints, s.initial, &cfg, spec.seed)?;
    let mut t = Table::new(spec, UAV_HEADER)?;
    t.meta("rounds", log.rounds_taken());
    t.meta("waypoints_reached", format!("{}/{}", log.waypoints_reached, s.waypoints.len()));
    t.meta("completed", log.completed);
    t.meta(
        "final_position",
        log.final_position.map(fmt_sig).join(" "),
    );
    for r in &log.rounds {
        let mut row = vec![
            r.round.to_string(),
            fmt_sig(r.round as f64 * s.t_update),
            r.waypoint.to_string(),
        ];
        row.extend(r.position.iter().map(|&v| fmt_sig(v)));
        row.extend(r.velocity.iter().map(|&v| fmt_sig(v)));
        row.extend(r.feedback.iter().map(|&v| fmt_sig(v)));
        row.extend(r.mv_true.iter().map(i8::to_string));
        match r.mv_hat {
            Some(hat) => row.extend(hat.iter().map(i8::to_string)),
            None => row.extend(std::iter::repeat_n(String::new(), 3)),
        }
        t.row(row)?;
    }
    Ok(t)
}
