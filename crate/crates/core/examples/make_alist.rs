//! Writes a regular code built by progressive edge growth as an alist file.
//!
//! cargo run --release --example make_alist -- <n> <d_v> <d_c> <seed> <out>

use mimqbp::codec::peg_regular;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 5 {
        eprintln!("usage: make_alist <n> <d_v> <d_c> <seed> <out>");
        std::process::exit(2);
    }
    let num = |i: usize| -> usize { args[i].parse().expect("numeric argument") };
    let graph = match peg_regular(num(0), num(1), num(2), num(3) as u64) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    std::fs::write(&args[4], graph.to_alist()).expect("write output");
}
