import os
import tempfile
from errno import EEXIST
from os import makedirs, path


def mkdir_p(folder_path):
    # Creates a directory. equivalent to using mkdir -p on the command line
    try:
        makedirs(folder_path)
    except OSError as exc:
        if exc.errno == EEXIST and path.isdir(folder_path):
            pass
        else:
            raise


def atomic_write(file_path: str, text: str):
    """Write text next to file_path and rename it into place."""
    folder = path.dirname(path.abspath(file_path))
    mkdir_p(folder)
    handle, temp_path = tempfile.mkstemp(dir=folder, prefix=".tmp_", suffix=path.basename(file_path))
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(temp_path, file_path)
    except BaseException:
        if path.exists(temp_path):
            os.remove(temp_path)
        raise
