use resdeconv_core::degrade::PRNG_NAME;
use resdeconv_core::{degrade, save_image, DegradeConfig};

use super::{ensure_dir, num, read_image, read_kernel, stem};
use crate::args::DegradeArgs;
use crate::error::{AtPath, CliResult};
use crate::manifest::Manifest;

pub fn run(a: &DegradeArgs, argv: &[String]) -> CliResult<()> {
    let (x, in_format) = read_image(&a.image)?;
    let k = read_kernel(&a.kernel)?;
    let cfg = DegradeConfig::new(a.noise_sigma, a.seed);
    let b = degrade(&x, &k, &cfg)?;

    ensure_dir(&a.out)?;
    let format = a.format.unwrap_or(in_format);
    let out = a.out.join(format!("{}.{}", stem(&a.image)?, format.extension()));
    save_image(&b, &out, format).at(&out)?;

    let mut m = Manifest::new("degrade", argv);
    m.set("image", a.image.display());
    m.set("kernel", a.kernel.display());
    m.set("solver", "none");
    m.set("config.noise_sigma", num(a.noise_sigma));
    m.set("seed", a.seed);
    m.set("prng", PRNG_NAME);
    m.set("output", out.display());
    m.write_to(&a.out)
}
