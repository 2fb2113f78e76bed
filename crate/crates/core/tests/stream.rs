use std::io::Cursor;
use std::sync::Arc;

use lgt_core::gibbs::mcmc_chain;
use lgt_core::stream::{SampleReader, SampleWriter, StreamError, StreamHeader};
use lgt_core::{CellComplex, EdgeConfig, Element, GaugeGroup, GibbsSpec, GroupFamily, LatticeBox};

#[test]
fn round_trip_through_file() {
    let cx = Arc::new(CellComplex::new(LatticeBox::cube(2, 2).unwrap()).unwrap());
    let g = Arc::new(GaugeGroup::builtin(&GroupFamily::Symmetric3).unwrap());
    let spec = GibbsSpec::new(cx.clone(), g, 0.8).unwrap();
    let samples: Vec<EdgeConfig> = mcmc_chain(&spec, 25, 4).collect();
    let header = StreamHeader::new(vec![(0, 2), (0, 2)], "S3", 0.8, 4, cx.num_edges(), 6);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.lgts");
    let mut w = SampleWriter::new(std::fs::File::create(&path).unwrap(), header.clone()).unwrap();
    for s in &samples {
        w.write(s).unwrap();
    }
    w.finish().unwrap();
    let r = SampleReader::new(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(r.header(), &header);
    assert_eq!(r.read_all().unwrap(), samples);
}

#[test]
fn wide_elements_and_errors() {
    let header = StreamHeader::new(vec![(0, 1), (0, 1), (0, 1)], "big", 1.5, 9, 3, 300);
    assert_eq!(header.element_width, 2);
    let mut w = SampleWriter::new(Vec::new(), header.clone()).unwrap();
    let s = EdgeConfig::from_values(vec![Element(299), Element(0), Element(257)]);
    w.write(&s).unwrap();
    assert!(matches!(w.write(&EdgeConfig::identity(2)), Err(StreamError::WrongLength { got: 2, expected: 3 })));
    let bytes = w.finish().unwrap();
    let r = SampleReader::new(Cursor::new(bytes.clone())).unwrap();
    assert_eq!(r.read_all().unwrap(), vec![s]);
    let truncated = &bytes[..bytes.len() - 1];
    assert!(matches!(SampleReader::new(Cursor::new(truncated)).unwrap().read_all(), Err(StreamError::Malformed(_))));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(SampleReader::new(Cursor::new(bad)), Err(StreamError::BadMagic)));
}
