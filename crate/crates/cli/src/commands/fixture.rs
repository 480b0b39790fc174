use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resdeconv_core::degrade::PRNG_NAME;
use resdeconv_core::metrics::{default_total_loss, DEFAULT_ALPHA, DEFAULT_GAMMA};
use resdeconv_core::{save_image, Image, ImageFormat};

use super::{ensure_dir, num};
use crate::args::LossFixtureArgs;
use crate::error::{AtPath, CliError, CliResult};
use crate::manifest::Manifest;

pub const FIXTURE_CSV: &str = "loss_fixture.csv";

/// Perturbation amplitudes cycled through the random cases; the larger ones
/// push differences past the smooth-L1 knee at 1.
const AMPLITUDES: [f64; 4] = [0.05, 0.3, 1.0, 2.5];

/// Writes `count` (restored, reference) pairs as lossless text images and a
/// CSV of their content, edge and total losses at the default weights.
/// Case 0 is an identical pair, case 1 two different constants, the rest are
/// random images with uniform perturbations.
pub fn run(a: &LossFixtureArgs, argv: &[String]) -> CliResult<()> {
    if a.count == 0 || a.size == 0 {
        return Err(CliError::Usage("--count and --size must be positive".into()));
    }
    ensure_dir(&a.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let n = a.size;
    let csv_path = a.out.join(FIXTURE_CSV);
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["case", "restored", "reference", "alpha", "gamma", "content", "edge", "total"])?;
    for case in 0..a.count {
        let (restored, reference) = match case {
            0 => {
                let x = Image::from_fn(n, n, |_, _| rng.random::<f64>());
                (x.clone(), x)
            }
            1 => (Image::filled(n, n, 0.2), Image::filled(n, n, 0.7)),
            _ => {
                let amp = AMPLITUDES[(case - 2) % AMPLITUDES.len()];
                let x = Image::from_fn(n, n, |_, _| rng.random::<f64>());
                let y = Image::from_fn(n, n, |r, c| x.get(r, c) + amp * (2.0 * rng.random::<f64>() - 1.0));
                (y, x)
            }
        };
        let r_name = format!("restored_{case:02}.txt");
        let x_name = format!("reference_{case:02}.txt");
        save_image(&restored, &a.out.join(&r_name), ImageFormat::Text).at(&a.out.join(&r_name))?;
        save_image(&reference, &a.out.join(&x_name), ImageFormat::Text).at(&a.out.join(&x_name))?;
        let l = default_total_loss(&restored, &reference)?;
        w.write_record([
            case.to_string(),
            r_name,
            x_name,
            num(DEFAULT_ALPHA),
            num(DEFAULT_GAMMA),
            num(l.content),
            num(l.edge),
            num(l.total),
        ])?;
    }
    w.flush().at(&csv_path)?;

    let mut m = Manifest::new("loss-fixture", argv);
    m.set("count", a.count);
    m.set("size", n);
    m.set("seed", a.seed);
    m.set("prng", PRNG_NAME);
    m.set("index", csv_path.display());
    m.write_to(&a.out)
}
