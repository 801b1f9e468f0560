//! Build the desk Type I codebook and show how its codewords overlap.
use covcut::codebook::{correlation, gen_type1_codebook, Type1Config};

fn main() -> covcut::Result<()> {
    let cfg = Type1Config {
        n1: 2,
        n2: 1,
        o1: 4,
        o2: 1,
        cophase_count: 2,
        cross_polarized: true,
    };
    let book = gen_type1_codebook(&cfg)?;
    println!("{} codewords on {} ports", book.len(), book.port_count());

    for m in 0..book.len() {
        let row: Vec<String> = (0..book.len())
            .map(|k| format!("{:.2}", correlation(book.codeword(m), book.codeword(k))))
            .collect();
        println!("{m:>2}: {}", row.join(" "));
    }
    Ok(())
}
