use resdeconv_core::metrics::{quality, total_loss};

use super::read_image;
use crate::args::EvalArgs;
use crate::error::{AtPath, CliResult};

pub fn run(a: &EvalArgs) -> CliResult<()> {
    let (x_hat, _) = read_image(&a.restored)?;
    let (x, _) = read_image(&a.reference)?;
    let q = quality(&x_hat, &x).at(&a.restored)?;
    let mut header = vec!["psnr_db", "ssim"];
    let mut row = vec![format_psnr(q.psnr_db), format!("{:?}", q.ssim)];
    if a.loss {
        let l = total_loss(&x_hat, &x, a.alpha, a.gamma)?;
        header.extend(["content", "edge", "total"]);
        row.extend([l.content, l.edge, l.total].map(|v| format!("{v:?}")));
    }
    if a.header {
        println!("{}", header.join(","));
    }
    println!("{}", row.join(","));
    Ok(())
}

fn format_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}
