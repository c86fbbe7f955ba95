use win_core::Raster;

/// 8-bit grayscale PNG of a raster. Encoder settings are fixed, so equal
/// rasters always give identical bytes.
pub fn encode_grayscale(raster: &Raster) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, raster.width(), raster.height());
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_compression(png::Compression::Balanced);
        let mut writer = encoder.write_header().expect("in-memory write");
        writer.write_image_data(raster.pixels()).expect("dimensions match raster");
    }
    out
}
