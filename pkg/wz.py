"""
Punto de entrada de la línea de comandos del laboratorio.

Uso:
    python wz.py list
    python wz.py verify
    python wz.py run --scenario scalar-wz --seed 1 --out ./data/runs/scalar
"""

import sys
from pathlib import Path

# Agregar el directorio raíz al path
sys.path.insert(0, str(Path(__file__).parent))

from app.cli import main

if __name__ == "__main__":
    main()
