try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

setup(
    name='lp-denoise',
    packages=['lpdenoise'],
    include_package_data=True,
    version='0.1.0',
    license='MIT',
    description='l2-lp variational Poisson denoising and deblurring',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    platforms='any',
    python_requires='>=3.9',
    install_requires=[
        'click',
        'numpy',
        'Pillow',
        'scikit-image',
    ],
    extras_require={
        'rich': ['rich'],
        'test': ['scipy'],
    },
    entry_points='''
        [console_scripts]
        lp-denoise=lpdenoise.cli:safe_cli
    ''',
)
