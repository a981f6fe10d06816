//! PSNR machinery and per-stream rate accounting.

use num_traits::ToPrimitive;

use crate::container::{Container, RecordKind};
use crate::error::{CodecError, Result};
use crate::graph::{warp, ReducedAdjacency};
use crate::plane::Plane;
use crate::{Frame, SubbandPlane};

/// Mean squared error between two planes of any scalar types.
pub fn mse<A, B>(a: &Plane<A>, b: &Plane<B>) -> Result<f64>
where
    A: ToPrimitive + Copy,
    B: ToPrimitive + Copy,
{
    if a.dims() != b.dims() {
        return Err(CodecError::DimensionMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    let sum: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = x.to_f64().unwrap() - y.to_f64().unwrap();
            d * d
        })
        .sum();
    Ok(sum / a.len() as f64)
}

fn mse_to_db(mse: f64, a_max: u16) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    let a = a_max as f64;
    10.0 * (a * a / mse).log10()
}

/// Peak signal-to-noise ratio in dB; infinite for identical planes.
pub fn psnr<A, B>(a: &Plane<A>, b: &Plane<B>, a_max: u16) -> Result<f64>
where
    A: ToPrimitive + Copy,
    B: ToPrimitive + Copy,
{
    Ok(mse_to_db(mse(a, b)?, a_max))
}

/// Lowpass quality metric: averages the MSE against the odd frame with the
/// MSE of the motion-warped lowpass against the even frame, then converts
/// to dB. The adjacency must be the decoder-reconstructed one.
pub fn psnr_lpt(
    lowpass: &SubbandPlane,
    f_odd: &Frame,
    f_even: &Frame,
    adjacency: &ReducedAdjacency,
    a_max: u16,
) -> Result<f64> {
    let direct = mse(lowpass, f_odd)?;
    let warped = warp(lowpass, adjacency)?;
    let compensated = mse(&warped, f_even)?;
    Ok(mse_to_db((direct + compensated) / 2.0, a_max))
}

/// Byte counts per stream of a coded container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateReport {
    pub lowpass: usize,
    pub highpass: usize,
    /// Motion information: coded masks, motion symbol streams and vector
    /// fields.
    pub motion: usize,
    /// Global header bytes (magic, version, dimensions, coding modes).
    pub header: usize,
}

impl RateReport {
    /// Sum of the per-stream record bytes; equals everything after the
    /// global header.
    pub fn payload_total(&self) -> usize {
        self.lowpass + self.highpass + self.motion
    }

    /// Full container size.
    pub fn file_total(&self) -> usize {
        self.header + self.payload_total()
    }
}

/// Exact byte accounting over a container's records.
pub fn rate_report(container: &Container) -> RateReport {
    let mut report = RateReport {
        header: Container::HEADER_LEN,
        ..RateReport::default()
    };
    for span in container.byte_map() {
        match span.kind {
            RecordKind::Lowpass | RecordKind::LowpassTail => report.lowpass += span.len,
            RecordKind::Highpass => report.highpass += span.len,
            RecordKind::Mask | RecordKind::MotionStream | RecordKind::MotionVectors => {
                report.motion += span.len
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_adjacency, random_frame};
    use crate::util::SplitMix64;

    #[test]
    fn psnr_basics() {
        let a: Frame = Plane::filled(4, 4, 100u16);
        assert_eq!(psnr(&a, &a, 4095).unwrap(), f64::INFINITY);

        // MSE equal to the squared peak gives 0 dB
        let zero: Frame = Plane::filled(4, 4, 0u16);
        let peak: Frame = Plane::filled(4, 4, 4095u16);
        let db = psnr(&zero, &peak, 4095).unwrap();
        assert!(db.abs() < 1e-12, "got {db}");

        // the 50 dB operating point at 12-bit peak amplitude
        let m = crate::motion_map::target_mse(50.0, 4095);
        assert!((mse_to_db(m, 4095) - 50.0).abs() < 1e-12);
        assert!((m - 167.69025).abs() < 1e-9);
    }

    #[test]
    fn psnr_symmetric_and_monotone() {
        let mut rng = SplitMix64::new(7);
        let a = random_frame(8, 8, 12, &mut rng);
        let b = random_frame(8, 8, 12, &mut rng);
        assert_eq!(psnr(&a, &b, 4095).unwrap(), psnr(&b, &a, 4095).unwrap());
        assert!(mse_to_db(10.0, 4095) > mse_to_db(20.0, 4095));
    }

    #[test]
    fn psnr_lpt_trivial_cases() {
        let f: Frame = Plane::filled(6, 5, 900u16);
        let lp: SubbandPlane = f.map(|v| v as i32);
        let id = ReducedAdjacency::identity(6, 5);
        assert_eq!(psnr_lpt(&lp, &f, &f, &id, 4095).unwrap(), f64::INFINITY);

        // both component MSEs equal m: the combined value matches plain psnr
        let mut rng = SplitMix64::new(9);
        let f_odd = random_frame(6, 5, 12, &mut rng);
        let adj = random_adjacency(6, 5, 2, &mut rng);
        let lp: SubbandPlane = f_odd.map(|v| v as i32 + 10);
        let f_even_warp = warp(&lp, &adj).unwrap().map(|v| (v - 10) as u16);
        let db = psnr_lpt(&lp, &f_odd, &f_even_warp, &adj, 4095).unwrap();
        assert!((db - mse_to_db(100.0, 4095)).abs() < 1e-12);
    }
}
