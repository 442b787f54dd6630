from setuptools import setup, find_packages


setup(name='stoqverify',
      version='1.0.0',
      description='Vérification classique de hamiltoniens stoquastiques uniformes et de SetCSP.',
      long_description=open('README.md', encoding='utf-8').read().strip(),
      long_description_content_type='text/markdown',
      keywords=[
            'stoquastic',
            'hamiltonian',
            'random-walk',
            'constraint-satisfaction',
            'verification'
      ],
      license='MIT License',
      packages=find_packages(exclude=['tests', 'tests.*']),
      package_data={'stoqverify': ['fixtures/*.json', 'fixtures/circuits/*.json']},
      include_package_data=True,

      python_requires='>=3.8',
      install_requires=[
            'numpy>=1.21.0',
            'scipy>=1.11.2',
            'pydantic>=2.0.0',
            'tqdm>=4.66.1',
            'python-dotenv>=0.19.0',
      ],
      extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "hypothesis>=6.0.0",
            "black>=22.0.0",
            "isort>=5.0.0",
            "flake8>=4.0.0",
            "mypy>=1.0.0",
        ],
      },
      entry_points={
        'console_scripts': [
            'stoqverify=stoqverify.main:main',
        ],
      },
      zip_safe=False
      )
