//! Raw IQ capture: little-endian interleaved 64-bit float re/im pairs,
//! one file per node (`node<id>.iq`).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

pub struct IqDumpWriter {
    out: BufWriter<File>,
}

impl IqDumpWriter {
    /// Create `node<id>.iq` inside `dir`.
    pub fn create(dir: &Path, node_id: usize) -> std::io::Result<Self> {
        let file = File::create(dir.join(format!("node{node_id}.iq")))?;
        Ok(IqDumpWriter {
            out: BufWriter::new(file),
        })
    }

    pub fn write(&mut self, samples: &[Complex64]) -> std::io::Result<()> {
        for s in samples {
            self.out.write_all(&s.re.to_le_bytes())?;
            self.out.write_all(&s.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

/// Read a full `.iq` capture back into memory.
pub fn read_iq_file(path: &Path) -> std::io::Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!(
                "{}: length {} is not a whole number of complex samples",
                path.display(),
                bytes.len()
            ),
        ));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..16].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}
