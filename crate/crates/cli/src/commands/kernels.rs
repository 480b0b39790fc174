use resdeconv_core::degrade::{support_size, PRNG_NAME};
use resdeconv_core::{
    degrade, gen_disk_kernel, gen_kernel, save_image, save_kernel_text, DegradeConfig, Image, ImageFormat,
    KernelFamily, KernelGenConfig,
};

use super::{ensure_dir, num, read_image, stem};
use crate::args::{KernelGenArgs, TestsetArgs};
use crate::error::{AtPath, CliError, CliResult};
use crate::manifest::Manifest;

pub const TESTSET_CSV: &str = "testset.csv";

pub fn kernel_gen(a: &KernelGenArgs, argv: &[String]) -> CliResult<()> {
    let k = match a.radius {
        Some(r) if a.family == KernelFamily::Disk => gen_disk_kernel(r)?,
        Some(_) => return Err(CliError::Usage("--radius only applies to --family disk".into())),
        None => gen_kernel(&KernelGenConfig {
            size: a.size,
            seed: a.seed,
            family: a.family,
        })?,
    };
    ensure_dir(&a.out)?;
    let txt = a.out.join("kernel.txt");
    save_kernel_text(&k, &txt).at(&txt)?;
    let preview = Image::new(k.rows(), k.cols(), k.taps().to_vec())?;
    let pgm = a.out.join("kernel.pgm");
    save_image(&preview.scale(1.0 / preview.max_value()), &pgm, ImageFormat::Pgm16).at(&pgm)?;

    let mut m = Manifest::new("kernel-gen", argv);
    m.set("family", a.family);
    m.set("size", k.rows());
    m.set("seed", a.seed);
    m.set("prng", PRNG_NAME);
    if let Some(r) = a.radius {
        m.set("radius", num(r));
    }
    m.set("support", support_size(&k, 1e-4));
    m.set("output", txt.display());
    m.write_to(&a.out)
}

/// Kernel `j` uses seed `seed + j`; the noise for (image `i`, kernel `j`)
/// uses `seed + 1_000_000 + i * kernels + j`.
pub fn make_testset(a: &TestsetArgs, argv: &[String]) -> CliResult<()> {
    if a.kernels == 0 {
        return Err(CliError::Usage("--kernels must be at least 1".into()));
    }
    ensure_dir(&a.out)?;
    let ext = a.format.extension();
    let mut kernels = Vec::with_capacity(a.kernels);
    for j in 0..a.kernels {
        let k = gen_kernel(&KernelGenConfig {
            size: a.size,
            seed: a.seed.wrapping_add(j as u64),
            family: a.family,
        })?;
        let name = format!("k_{j:02}.txt");
        save_kernel_text(&k, &a.out.join(&name)).at(&a.out.join(&name))?;
        kernels.push((name, k));
    }

    let csv_path = a.out.join(TESTSET_CSV);
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["id", "x", "k", "b", "noise_sigma", "noise_seed"])?;
    for (i, path) in a.image.iter().enumerate() {
        let (x, _) = read_image(path)?;
        let name = stem(path)?;
        let x_name = format!("x_{name}.{ext}");
        save_image(&x, &a.out.join(&x_name), a.format).at(&a.out.join(&x_name))?;
        for (j, (k_name, k)) in kernels.iter().enumerate() {
            let noise_seed = a
                .seed
                .wrapping_add(1_000_000)
                .wrapping_add((i * a.kernels + j) as u64);
            let b = degrade(&x, k, &DegradeConfig::new(a.noise_sigma, noise_seed)).at(path)?;
            let b_name = format!("b_{name}_k{j:02}.{ext}");
            save_image(&b, &a.out.join(&b_name), a.format).at(&a.out.join(&b_name))?;
            w.write_record([
                format!("{name}_k{j:02}"),
                x_name.clone(),
                k_name.clone(),
                b_name,
                num(a.noise_sigma),
                noise_seed.to_string(),
            ])?;
        }
    }
    w.flush().at(&csv_path)?;

    let mut m = Manifest::new("make-testset", argv);
    for (i, p) in a.image.iter().enumerate() {
        m.set(format!("image.{i}"), p.display());
    }
    m.set("family", a.family);
    m.set("kernels", a.kernels);
    m.set("size", a.size);
    m.set("config.noise_sigma", num(a.noise_sigma));
    m.set("seed", a.seed);
    m.set("prng", PRNG_NAME);
    m.set("index", csv_path.display());
    m.write_to(&a.out)
}
