//! Zip export of a package directory.

use std::fs;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipArchive, ZipWriter};

fn collect(root: &Path, dir: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("walked below root");
            let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            out.push(parts.join("/"));
        }
    }
    Ok(())
}

/// Zips every file under `dir` with `/`-separated relative names, in path
/// order and with a fixed timestamp, so equal directories give equal bytes.
pub fn zip_dir(dir: &Path) -> std::io::Result<Vec<u8>> {
    let mut files = Vec::new();
    collect(dir, dir, &mut files)?;
    files.sort();
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default())
        .unix_permissions(0o644);
    let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
    for rel in files {
        let bytes = fs::read(rel.split('/').fold(dir.to_path_buf(), |p, s| p.join(s)))?;
        zip.start_file(rel, options).map_err(std::io::Error::other)?;
        zip.write_all(&bytes)?;
    }
    Ok(zip.finish().map_err(std::io::Error::other)?.into_inner())
}

/// Extracts an archive produced by [`zip_dir`] into `dest`.
pub fn unzip_to(bytes: &[u8], dest: &Path) -> std::io::Result<()> {
    let mut archive = ZipArchive::new(Cursor::new(bytes)).map_err(std::io::Error::other)?;
    for i in 0..archive.len() {
        let mut file = archive.by_index(i).map_err(std::io::Error::other)?;
        let Some(rel) = file.enclosed_name() else {
            return Err(std::io::Error::other(format!("unsafe path in archive: {}", file.name())));
        };
        let path = dest.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)?;
        fs::write(path, buf)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("Scripts/Player")).unwrap();
        fs::write(dir.path().join("Scripts/Player/A.cs"), "class A {}").unwrap();
        fs::write(dir.path().join("manifest.json"), "{}").unwrap();
        let a = zip_dir(dir.path()).unwrap();
        let b = zip_dir(dir.path()).unwrap();
        assert_eq!(a, b);
        let out = tempfile::tempdir().unwrap();
        unzip_to(&a, out.path()).unwrap();
        assert_eq!(fs::read_to_string(out.path().join("Scripts/Player/A.cs")).unwrap(), "class A {}");
    }
}
