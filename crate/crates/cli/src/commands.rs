use std::io::Write;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use opstable::charfn::density as density_at;
use opstable::mc_oracle::{mc_price, McPrice};
use opstable::moments::frac_moment;
use opstable::pde_coeffs::CoeffTable;
use opstable::pricer::price_option;
use opstable::{
    ContinuationMode, Error, Execution, Measure, OptionContract, OptionStyle, PriceReport, Regime,
    SimConfig,
};

use crate::{Format, Loaded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Call,
    Put,
}

impl From<Style> for OptionStyle {
    fn from(s: Style) -> Self {
        match s {
            Style::Call => OptionStyle::Call,
            Style::Put => OptionStyle::Put,
        }
    }
}

/// Price European options on the configured model.
#[derive(Args, Debug)]
#[command(after_help = "CSV columns: style,spot,strike,tau,price,n1_re,n1_im,n2_re,n2_im,d1_re,d1_im,\
hedge,portfolio,portfolio_gap,imag_residue,quadrature_error,parity_gap,mode\n\
One row per (strike, maturity) pair, strikes varying fastest.")]
pub struct PriceArgs {
    /// Strike(s); a comma-separated list prices a grid.
    #[arg(long, required = true, value_delimiter = ',')]
    pub strike: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub spot: f64,
    /// Maturity date(s), comma-separated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub maturity: Vec<f64>,
    /// Valuation date.
    #[arg(long, default_value_t = 0.0)]
    pub time: f64,
    #[arg(long, value_enum, default_value_t = Style::Call)]
    pub style: Style,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
}

#[derive(Serialize)]
struct PriceRow {
    style: OptionStyle,
    spot: f64,
    strike: f64,
    tau: f64,
    price: f64,
    n1_re: f64,
    n1_im: f64,
    n2_re: f64,
    n2_im: f64,
    d1_re: f64,
    d1_im: f64,
    hedge: f64,
    portfolio: f64,
    portfolio_gap: f64,
    imag_residue: f64,
    quadrature_error: f64,
    parity_gap: f64,
    mode: ContinuationMode,
}

impl From<&PriceReport> for PriceRow {
    fn from(r: &PriceReport) -> Self {
        Self {
            style: r.style,
            spot: r.spot,
            strike: r.strike,
            tau: r.tau,
            price: r.price,
            n1_re: r.n1.re,
            n1_im: r.n1.im,
            n2_re: r.n2.re,
            n2_im: r.n2.im,
            d1_re: r.d1.re,
            d1_im: r.d1.im,
            hedge: r.hedge,
            portfolio: r.portfolio,
            portfolio_gap: r.portfolio_gap,
            imag_residue: r.imag_residue,
            quadrature_error: r.quadrature_error,
            parity_gap: r.parity_gap,
            mode: r.mode,
        }
    }
}

pub fn write_csv<T: Serialize>(rows: &[T], out: &mut impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(value: &T, out: &mut impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn price(l: &Loaded, a: &PriceArgs, out: &mut impl Write) -> Result<u8> {
    let mut reports = Vec::with_capacity(a.strike.len() * a.maturity.len());
    for &maturity in &a.maturity {
        for &strike in &a.strike {
            let opt = OptionContract::new(a.style.into(), strike, maturity)?;
            reports.push(price_option(&l.model, &opt, a.spot, a.time, &l.config.quadrature)?);
        }
    }
    match a.out {
        Format::Json if reports.len() == 1 => write_json(&reports[0], out)?,
        Format::Json => write_json(&reports, out)?,
        Format::Csv => write_csv(&reports.iter().map(PriceRow::from).collect::<Vec<_>>(), out)?,
    }
    Ok(0)
}

/// Closed-form fractional moment E[(sigma . L_t)^beta].
#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
}

#[derive(Serialize)]
struct MomentOut {
    beta: f64,
    regime: Regime,
    value_re: Option<f64>,
    value_im: Option<f64>,
    exists: bool,
}

pub fn moments(l: &Loaded, a: &MomentsArgs, out: &mut impl Write) -> Result<u8> {
    let value = match frac_moment(&l.model, a.beta, a.t) {
        Ok(v) => Some(v),
        Err(Error::MomentInfinite(msg)) => {
            log::info!("{msg}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    write_json(
        &MomentOut {
            beta: a.beta,
            regime: l.model.index().regime(),
            value_re: value.map(|v| v.re),
            value_im: value.map(|v| v.im),
            exists: value.is_some(),
        },
        out,
    )?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    /// k,n,a: the integer coefficients of the moment expansion.
    A,
    /// n,S_re,S_im: the power moments of the Lévy measure.
    S,
    /// n,E,cutoff,growth: the truncated generator coefficients.
    E,
}

/// Generator coefficient tables as CSV.
#[derive(Args, Debug)]
pub struct CoeffsArgs {
    #[arg(long, value_enum, default_value_t = Table::E)]
    pub table: Table,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    /// Upper end of the jump-size domain for the truncated coefficients.
    #[arg(long, default_value_t = 10.0)]
    pub cutoff: f64,
}

pub fn coeffs(l: &Loaded, a: &CoeffsArgs, out: &mut impl Write) -> Result<u8> {
    let t = CoeffTable::build(&l.model, a.k_max, a.cutoff)?;
    let mut w = csv::Writer::from_writer(out);
    match a.table {
        Table::A => {
            w.write_record(["k", "n", "a"])?;
            for (k, row) in t.a.iter().enumerate() {
                for (n, v) in row.iter().enumerate() {
                    w.write_record([k.to_string(), n.to_string(), v.to_string()])?;
                }
            }
        }
        Table::S => {
            w.write_record(["n", "S_re", "S_im"])?;
            for (n, s) in t.s.iter().enumerate() {
                w.write_record([n.to_string(), s.re.to_string(), s.im.to_string()])?;
            }
        }
        Table::E => {
            w.write_record(["n", "E", "cutoff", "growth"])?;
            for (i, e) in t.e.iter().enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    e.value.to_string(),
                    e.cutoff.to_string(),
                    e.growth.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(0)
}

/// Density of sigma . L_tau on a uniform grid, as CSV columns xi,density.
#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

#[derive(Serialize)]
struct DensityRow {
    xi: f64,
    density: f64,
}

pub fn density(l: &Loaded, a: &DensityArgs, out: &mut impl Write) -> Result<u8> {
    if a.points < 2 || !(a.to > a.from) {
        bail!(Error::Domain("need at least two points and from < to".into()));
    }
    let step = (a.to - a.from) / (a.points - 1) as f64;
    let rows = (0..a.points)
        .map(|i| {
            let xi = a.from + step * i as f64;
            Ok(DensityRow {
                xi,
                density: density_at(&l.model, xi, a.tau, &l.config.quadrature)?,
            })
        })
        .collect::<opstable::Result<Vec<_>>>()?;
    write_csv(&rows, out)?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Physical,
    Compensated,
}

/// Monte-Carlo price of one option.
#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long)]
    pub strike: f64,
    #[arg(long, default_value_t = 1.0)]
    pub spot: f64,
    #[arg(long)]
    pub maturity: f64,
    #[arg(long, default_value_t = 0.0)]
    pub time: f64,
    #[arg(long, value_enum, default_value_t = Style::Call)]
    pub style: Style,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MeasureArg::Compensated)]
    pub measure: MeasureArg,
    /// Run the blocks in order on one thread.
    #[arg(long)]
    pub sequential: bool,
}

pub fn mc(l: &Loaded, a: &McArgs, out: &mut impl Write) -> Result<u8> {
    let mut cfg = SimConfig::new(a.paths, a.seed);
    cfg.measure = match a.measure {
        MeasureArg::Physical => Measure::Physical,
        MeasureArg::Compensated => Measure::Compensated,
    };
    if a.sequential {
        cfg = cfg.with_execution(Execution::Sequential);
    }
    let opt = OptionContract::new(a.style.into(), a.strike, a.maturity)?;
    let res: McPrice = mc_price(&l.model, &opt, a.spot, a.time, &cfg)?;
    write_json(&res, out)?;
    Ok(0)
}
