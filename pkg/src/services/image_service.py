from src.models.image_model import BandImage


def crop(band: BandImage, x0: int, y0: int, width: int, height: int) -> BandImage:
    """
    Cut a sub-window out of a band, keeping its spacing and wavenumber.

    Raises:
        ValueError: If the window is empty or leaves the raster.
    """
    if width < 1 or height < 1:
        raise ValueError(f"Crop window must be non-empty, got {width}x{height}")
    if x0 < 0 or y0 < 0 or x0 + width > band.width or y0 + height > band.height:
        raise ValueError(
            f"Crop window ({x0}, {y0}, {width}, {height}) exceeds band bounds {band.width}x{band.height}"
        )
    return band.with_pixels(band.pixels[y0:y0 + height, x0:x0 + width])
