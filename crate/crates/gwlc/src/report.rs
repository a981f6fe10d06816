//! Benchmark harness: runs configuration sweeps over a volume and renders
//! rate/quality tables (plain text and delimited).

use crate::container::{
    decode_pair_analysis, decode_volume, encode_volume, Container, EncodeConfig, McMode,
    RadiusMode,
};
use crate::error::Result;
use crate::metrics::{psnr_lpt, rate_report, RateReport};
use crate::sampling::InterpMethod;
use crate::volume::Volume;

/// Outcome of coding one configuration.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub label: String,
    /// Mean lowpass quality over all coded pairs, in dB.
    pub psnr_lpt: f64,
    pub rate: RateReport,
    pub lossless: bool,
}

/// Codes the volume once and measures quality, rates and losslessness.
pub fn evaluate(volume: &Volume, config: &EncodeConfig, label: &str) -> Result<BenchRow> {
    let container = encode_volume(volume, config)?;
    let rate = rate_report(&container);
    let lossless = decode_volume(&container)? == *volume;
    Ok(BenchRow {
        label: label.to_string(),
        psnr_lpt: mean_pair_quality(volume, &container)?,
        rate,
        lossless,
    })
}

/// Average `PSNR_LP_t` over every coded pair of the container.
pub fn mean_pair_quality(volume: &Volume, container: &Container) -> Result<f64> {
    let a_max = volume.header().max_amplitude();
    let mut sum = 0.0;
    let mut count = 0usize;
    for analysis in decode_pair_analysis(container)? {
        let f_odd = volume.frame(analysis.z, 2 * analysis.pair);
        let f_even = volume.frame(analysis.z, 2 * analysis.pair + 1);
        sum += psnr_lpt(&analysis.lowpass, f_odd, f_even, &analysis.adjacency, a_max)?;
        count += 1;
    }
    Ok(if count == 0 { f64::INFINITY } else { sum / count as f64 })
}

/// Sweeps every sampling density for one interpolation method.
pub fn density_sweep(
    volume: &Volume,
    base: &EncodeConfig,
    method: InterpMethod,
) -> Result<Vec<BenchRow>> {
    (1..=16u8)
        .map(|k| {
            let config = EncodeConfig {
                density_index: k,
                method,
                mc: McMode::Graph,
                ..*base
            };
            evaluate(
                volume,
                &config,
                &format!("{method} d={:.2}%", k as f64 * 6.25),
            )
        })
        .collect()
}

/// Fixed radii 1..=3 without masking, then the smoothed and the
/// smoothed+masked configurations at the maximum radius.
pub fn radius_table(volume: &Volume, base: &EncodeConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for r in 1u8..=3 {
        let config = EncodeConfig {
            r_max: r,
            radius_mode: RadiusMode::Fixed,
            psnr_target: None,
            mc: McMode::Graph,
            ..*base
        };
        rows.push(evaluate(volume, &config, &format!("r={r}"))?);
    }
    rows.push(evaluate(
        volume,
        &EncodeConfig {
            r_max: 3,
            radius_mode: RadiusMode::Smooth,
            psnr_target: None,
            mc: McMode::Graph,
            ..*base
        },
        "r_max=3",
    )?);
    rows.push(evaluate(
        volume,
        &EncodeConfig {
            r_max: 3,
            radius_mode: RadiusMode::Smooth,
            mc: McMode::Graph,
            psnr_target: base.psnr_target.or(Some(50.0)),
            ..*base
        },
        "r_max=3 masked",
    )?);
    Ok(rows)
}

/// Graph-based coding against the block-matching baseline and the
/// uncompensated transform.
pub fn method_comparison(volume: &Volume, base: &EncodeConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for block_size in [2u8, 4, 8] {
        let config = EncodeConfig {
            mc: McMode::Block { block_size },
            ..*base
        };
        rows.push(evaluate(volume, &config, &format!("block s_b={block_size}"))?);
    }
    rows.push(evaluate(
        volume,
        &EncodeConfig {
            mc: McMode::None,
            ..*base
        },
        "none",
    )?);
    rows.push(evaluate(
        volume,
        &EncodeConfig {
            mc: McMode::Graph,
            ..*base
        },
        "graph",
    )?);
    Ok(rows)
}

fn format_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.2}")
    }
}

/// Renders rows as a table with one column per configuration: quality,
/// per-stream byte counts and the lossless check.
pub fn render_table(title: &str, rows: &[BenchRow]) -> String {
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    let label_width = rows
        .iter()
        .map(|r| r.label.len())
        .chain(["configuration".len()])
        .max()
        .unwrap_or(13);
    let header = [
        "PSNR_LP_t [dB]",
        "LP [B]",
        "HP [B]",
        "m_tx [B]",
        "sum [B]",
        "lossless",
    ];
    out.push_str(&format!("{:<label_width$}", "configuration"));
    for h in header {
        out.push_str(&format!(" {h:>14}"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{:<label_width$}", row.label));
        out.push_str(&format!(" {:>14}", format_db(row.psnr_lpt)));
        out.push_str(&format!(" {:>14}", row.rate.lowpass));
        out.push_str(&format!(" {:>14}", row.rate.highpass));
        out.push_str(&format!(" {:>14}", row.rate.motion));
        out.push_str(&format!(" {:>14}", row.rate.payload_total()));
        out.push_str(&format!(" {:>14}", if row.lossless { "yes" } else { "NO" }));
        out.push('\n');
    }
    out
}

/// Machine-readable form: one comma-separated line per row.
pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("label,psnr_lpt_db,lp_bytes,hp_bytes,mtx_bytes,sum_bytes,lossless\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.label,
            if row.psnr_lpt.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.4}", row.psnr_lpt)
            },
            row.rate.lowpass,
            row.rate.highpass,
            row.rate.motion,
            row.rate.payload_total(),
            row.lossless
        ));
    }
    out
}
