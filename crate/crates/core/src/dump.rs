//! Binary dump format: one ASCII header line
//! `SUBRED v1 kind=<graph|matrix> d=<int> space=<bit|real>` followed by
//! the `d x d` entries in row-major order. Bits are packed eight per
//! byte, most significant bit first, with the last byte zero-padded;
//! reals are little-endian `f64`. Graphs are written as their full
//! symmetric adjacency matrix with an empty diagonal.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::pairs::Space;
use crate::sampler::{Entries, GraphSample, MatrixSample};

#[derive(Debug, Clone, PartialEq)]
pub enum Dump {
    Graph(GraphSample),
    Matrix(MatrixSample),
}

fn pack_bits<W: Write>(w: &mut W, bits: impl Iterator<Item = bool>) -> Result<()> {
    let mut out = Vec::new();
    let mut byte = 0u8;
    let mut filled = 0;
    for b in bits {
        byte = (byte << 1) | u8::from(b);
        filled += 1;
        if filled == 8 {
            out.push(byte);
            byte = 0;
            filled = 0;
        }
    }
    if filled > 0 {
        out.push(byte << (8 - filled));
    }
    w.write_all(&out)?;
    Ok(())
}

fn unpack_bits(bytes: &[u8], count: usize) -> Vec<bool> {
    (0..count).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect()
}

pub fn write_graph<W: Write>(w: &mut W, g: &GraphSample) -> Result<()> {
    let n = g.n();
    writeln!(w, "SUBRED v1 kind=graph d={n} space=bit")?;
    pack_bits(w, (0..n * n).map(|idx| g.has_edge(idx / n, idx % n)))
}

pub fn write_matrix<W: Write>(w: &mut W, m: &MatrixSample) -> Result<()> {
    let d = m.d();
    match m.entries() {
        Entries::Bits(bits) => {
            writeln!(w, "SUBRED v1 kind=matrix d={d} space=bit")?;
            pack_bits(w, bits.iter().copied())
        }
        Entries::Reals(vals) => {
            writeln!(w, "SUBRED v1 kind=matrix d={d} space=real")?;
            for v in vals {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        }
    }
}

fn header_field<'a>(tokens: &[&'a str], key: &str) -> Result<&'a str> {
    tokens
        .iter()
        .find_map(|t| t.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("dump header lacks `{key}`")))
}

pub fn read_dump<R: BufRead>(r: &mut R) -> Result<Dump> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 2 || tokens[0] != "SUBRED" || tokens[1] != "v1" {
        return Err(Error::Parse(format!("not a SUBRED v1 dump: `{}`", header.trim_end())));
    }
    let kind = header_field(&tokens, "kind")?;
    let d: usize = header_field(&tokens, "d")?
        .parse()
        .map_err(|_| Error::Parse("dump dimension is not an integer".into()))?;
    let space = match header_field(&tokens, "space")? {
        "bit" => Space::Bit,
        "real" => Space::Real,
        other => return Err(Error::Parse(format!("unknown space `{other}`"))),
    };
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let count = d * d;
    let expected = match space {
        Space::Bit => count.div_ceil(8),
        Space::Real => count * 8,
    };
    if body.len() != expected {
        return Err(Error::Parse(format!("dump body has {} bytes, expected {expected}", body.len())));
    }
    match (kind, space) {
        ("graph", Space::Bit) => {
            let bits = unpack_bits(&body, count);
            let mut g = GraphSample::empty(d);
            for i in 0..d {
                if bits[i * d + i] {
                    return Err(Error::Parse(format!("graph dump has a self-loop at {i}")));
                }
                for j in (i + 1)..d {
                    if bits[i * d + j] != bits[j * d + i] {
                        return Err(Error::Parse(format!("graph dump is not symmetric at ({i}, {j})")));
                    }
                    g.set_edge(i, j, bits[i * d + j]);
                }
            }
            Ok(Dump::Graph(g))
        }
        ("graph", Space::Real) => Err(Error::Parse("graph dumps must use space=bit".into())),
        ("matrix", Space::Bit) => Ok(Dump::Matrix(MatrixSample::from_entries(
            d,
            Entries::Bits(unpack_bits(&body, count)),
        )?)),
        ("matrix", Space::Real) => {
            let vals = body
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            Ok(Dump::Matrix(MatrixSample::from_entries(d, Entries::Reals(vals))?))
        }
        (other, _) => Err(Error::Parse(format!("unknown dump kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::sampler::sample_er;

    #[test]
    fn graph_round_trip() {
        let mut rng = stream_rng(9, &[]);
        let g = sample_er(11, 0.4, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_graph(&mut buf, &g).unwrap();
        assert!(buf.starts_with(b"SUBRED v1 kind=graph d=11 space=bit\n"));
        assert_eq!(read_dump(&mut buf.as_slice()).unwrap(), Dump::Graph(g));
    }

    #[test]
    fn bit_packing_is_msb_first() {
        let m = MatrixSample::from_entries(3, Entries::Bits(vec![true, false, false, false, false, false, false, false, true]))
            .unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let body = &buf[buf.iter().position(|&b| b == b'\n').unwrap() + 1..];
        assert_eq!(body, &[0b1000_0000, 0b1000_0000]);
    }

    #[test]
    fn real_matrix_round_trip() {
        let m = MatrixSample::from_entries(2, Entries::Reals(vec![0.5, -1.25, 3.0, f64::MIN_POSITIVE])).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(buf.len(), "SUBRED v1 kind=matrix d=2 space=real\n".len() + 32);
        assert_eq!(read_dump(&mut buf.as_slice()).unwrap(), Dump::Matrix(m));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_dump(&mut b"NOPE\n".as_slice()).is_err());
        assert!(read_dump(&mut b"SUBRED v1 kind=matrix d=2 space=bit\n".as_slice()).is_err());
        assert!(read_dump(&mut b"SUBRED v1 kind=graph d=2 space=bit\n\xC0".as_slice()).is_err());
    }
}
